#include <catch2/catch.hpp>

#include <cmath>

#include "dimerbath/chain.hpp"

using namespace dimerbath;

namespace {
const ChainParams kReferenceChain{225, 0.3, 0.1, 0.05};
const SystemParams kReferenceSystem{0.35, 1e-4};
}  // namespace

TEST_CASE("chain parameter invariants are enforced") {
  CHECK_THROWS_AS(build_bath_potential(ChainParams{3, 0.0, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_bath_potential(ChainParams{1, 0.3, 0.1, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(build_bath_potential(ChainParams{10, -0.1, 0.1, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(build_bath_potential(ChainParams{10, 0.3, -0.1, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(band_edges(ChainParams{10, 1.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("bath potential entries follow the bond expansion") {
  // Expanding the bond terms by hand: every site collects omega0^2 plus
  // the stiffness of each bond it touches; bond (i,i+1) contributes -k
  // off the diagonal. Site 1 additionally carries the missing left-bond
  // stiffness h; the last site keeps its free end.
  PotentialMatrix v = build_bath_potential(kReferenceChain);
  REQUIRE(v.dim == 225);
  CHECK(v.entries.isApprox(v.entries.transpose()));
  for (int s = 0; s < 224; ++s) CHECK(v.entries(s, s) == Approx(0.24).margin(1e-15));
  CHECK(v.entries(224, 224) == Approx(0.09 + 0.05).margin(1e-15));
  CHECK(v.entries(0, 1) == Approx(-0.1).margin(1e-15));
  CHECK(v.entries(1, 2) == Approx(-0.05).margin(1e-15));
  CHECK(v.entries(2, 3) == Approx(-0.1).margin(1e-15));
  CHECK(v.entries(0, 2) == 0.0);
}

TEST_CASE("monatomic limit g = h") {
  PotentialMatrix v = build_bath_potential(ChainParams{4, 1.0, 0.5, 0.5});
  CHECK(v.entries(0, 0) == Approx(2.0));
  CHECK(v.entries(1, 1) == Approx(2.0));
  CHECK(v.entries(2, 2) == Approx(2.0));
  CHECK(v.entries(3, 3) == Approx(1.5));  // free right end
  for (int i = 0; i < 3; ++i) CHECK(v.entries(i, i + 1) == Approx(-0.5));
}

TEST_CASE("full potential couples system to site 1 only") {
  PotentialMatrix v = build_full_potential(kReferenceChain, kReferenceSystem);
  REQUIRE(v.dim == 226);
  CHECK(v.entries(0, 0) == Approx(0.1225).margin(1e-15));
  CHECK(v.entries(0, 1) == Approx(-1e-4).margin(1e-18));
  CHECK(v.entries(0, 2) == 0.0);

  PotentialMatrix decoupled = build_full_potential(kReferenceChain, SystemParams{0.35, 0.0});
  CHECK(decoupled.entries(0, 1) == 0.0);
  CHECK(decoupled.entries.row(0).tail(225).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("strong coupling destabilizes the full potential") {
  // Scan kappa upward until the builder rejects the matrix.
  SystemParams sys{0.2, 0.01};
  bool rejected = false;
  double kappa_at_rejection = 0;
  while (sys.kappa < 10.0) {
    try {
      build_full_potential(kReferenceChain, sys);
    } catch (const std::runtime_error&) {
      rejected = true;
      kappa_at_rejection = sys.kappa;
      break;
    }
    sys.kappa *= 2;
  }
  REQUIRE(rejected);
  CHECK(kappa_at_rejection < 1.0);
  CHECK_NOTHROW(build_full_potential(kReferenceChain, SystemParams{0.2, 1e-4}));
}

TEST_CASE("diagonalize handles already-diagonal and hand-solved matrices") {
  {
    PotentialMatrix v{2, Eigen::Matrix2d{{1, 0}, {0, 4}}};
    NormalModes nm = diagonalize(v);
    CHECK(nm.frequencies(0) == Approx(1.0));
    CHECK(nm.frequencies(1) == Approx(2.0));
    CHECK(nm.modes.isApprox(Eigen::Matrix2d::Identity()));
  }
  {
    PotentialMatrix v{2, Eigen::Matrix2d{{2, -1}, {-1, 2}}};
    NormalModes nm = diagonalize(v);
    CHECK(nm.frequencies(0) * nm.frequencies(0) == Approx(1.0));
    CHECK(nm.frequencies(1) * nm.frequencies(1) == Approx(3.0));
    // sign convention: largest-magnitude entry positive, first on ties
    CHECK(nm.modes(0, 0) > 0);
    CHECK(nm.modes(0, 1) > 0);
  }
}

TEST_CASE("normal modes satisfy orthonormality and reconstruction bounds") {
  PotentialMatrix v = build_bath_potential(kReferenceChain);
  NormalModes nm = diagonalize(v);
  const int n = v.dim;
  double ortho =
      (nm.modes.transpose() * nm.modes - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  CHECK(ortho <= 1e-10);
  Eigen::MatrixXd recon = nm.modes *
                          nm.frequencies.array().square().matrix().asDiagonal() *
                          nm.modes.transpose();
  CHECK((recon - v.entries).cwiseAbs().maxCoeff() <= 1e-8 * v.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("reference chain spectrum fills two bands and leaves the gap empty") {
  NormalModes nm = diagonalize(build_bath_potential(kReferenceChain));
  BandEdges edges = band_edges(kReferenceChain);
  int acoustic = 0, in_gap = 0, optical = 0;
  for (int i = 0; i < nm.frequencies.size(); ++i) {
    double w = nm.frequencies(i);
    if (w <= edges.acoustic_top * (1 + 1e-3))
      ++acoustic;
    else if (w >= edges.optical_bottom * (1 - 1e-3))
      ++optical;
    else
      ++in_gap;
  }
  CHECK(in_gap == 0);
  CHECK((acoustic == 112 || acoustic == 113));
  CHECK(acoustic + optical == 225);
  CHECK(nm.frequencies(0) >= 0.3 - 1e-9);
  CHECK(nm.frequencies(0) == Approx(0.3).epsilon(1e-3));
  CHECK(nm.frequencies(nm.frequencies.size() - 1) == Approx(0.625).epsilon(5e-3));
}

TEST_CASE("uniform-diagonal end correction pins a mode mid-gap at odd n") {
  // With both ends compensated the off-diagonal part is bipartite with
  // parts of unequal size, forcing an eigenvalue exactly at omega0^2+g+h.
  // The mode is localized at the weak-bond end and essentially decoupled
  // from site 1. This is why first_site is the default.
  NormalModes nm = diagonalize(build_bath_potential(kReferenceChain, EndCorrection::both_sites));
  const double pinned = std::sqrt(0.3 * 0.3 + 0.1 + 0.05);
  double closest = 1e9;
  int idx = -1;
  for (int i = 0; i < nm.frequencies.size(); ++i)
    if (std::abs(nm.frequencies(i) - pinned) < closest) {
      closest = std::abs(nm.frequencies(i) - pinned);
      idx = i;
    }
  CHECK(closest <= 1e-9);
  CHECK(std::abs(nm.modes(0, idx)) < 1e-12);
}

TEST_CASE("closed-form dispersion matches the band edges") {
  BandEdges edges = band_edges(kReferenceChain);
  CHECK(edges.acoustic_top == Approx(0.436).epsilon(5e-3));
  CHECK(edges.optical_bottom == Approx(0.540).epsilon(5e-3));
  CHECK(edges.optical_top == Approx(0.625).epsilon(5e-3));
  CHECK(edges.acoustic_bottom == Approx(0.3));

  // branch extremes sit at k -> 0, pi/2, pi
  CHECK(dispersion_closed_form(kReferenceChain, Branch::acoustic, 1e-9) ==
        Approx(edges.acoustic_bottom).margin(1e-6));
  CHECK(dispersion_closed_form(kReferenceChain, Branch::acoustic, M_PI / 2) ==
        Approx(edges.acoustic_top));
  CHECK(dispersion_closed_form(kReferenceChain, Branch::optical, M_PI / 2) ==
        Approx(edges.optical_bottom));
  CHECK(dispersion_closed_form(kReferenceChain, Branch::optical, 1e-9) ==
        Approx(edges.optical_top).margin(1e-6));

  ChainParams mono{20, 0.3, 0.1, 0.1};
  CHECK(band_edges(mono).gap_width() == 0.0);
  CHECK(dispersion_closed_form(mono, Branch::acoustic, M_PI / 2) ==
        Approx(std::sqrt(0.3 * 0.3 + 2 * 0.1)));
  CHECK(dispersion_closed_form(mono, Branch::optical, M_PI / 2) ==
        Approx(std::sqrt(0.3 * 0.3 + 2 * 0.1)));

  CHECK_THROWS_AS(dispersion_closed_form(kReferenceChain, Branch::acoustic, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(dispersion_closed_form(kReferenceChain, Branch::acoustic, 3.5),
                  std::invalid_argument);
}

TEST_CASE("closed-form dispersion tracks exact eigenfrequencies") {
  // On the fixed-free momentum grid the closed form is exact for g = h;
  // dimerization only moves the open-chain quantization at O(1/N).
  auto compare = [](const ChainParams& chain, double tol) {
    NormalModes nm = diagonalize(build_bath_potential(chain));
    Eigen::VectorXd k = open_chain_momentum_grid(chain.n);
    std::vector<double> predicted;
    for (int j = 0; j < chain.n; ++j)
      predicted.push_back(dispersion_closed_form(
          chain, k(j) < M_PI / 2 ? Branch::acoustic : Branch::optical, k(j)));
    std::sort(predicted.begin(), predicted.end());
    double worst = 0;
    for (int j = 0; j < chain.n; ++j)
      worst = std::max(worst, std::abs(predicted[j] - nm.frequencies(j)) / nm.frequencies(j));
    return worst;
  };
  CHECK(compare(ChainParams{225, 0.3, 0.1, 0.1}, 1e-10) <= 1e-10);
  CHECK(compare(kReferenceChain, 0.02) <= 0.02);
}

TEST_CASE("group velocity agrees with central finite differences") {
  const double step = 1e-6;
  for (Branch branch : {Branch::acoustic, Branch::optical}) {
    double worst = 0;
    for (int i = 1; i < 200; ++i) {
      double k = M_PI * i / 200.0;
      if (k - step <= 0 || k + step >= M_PI) continue;
      double fd = std::abs(dispersion_closed_form(kReferenceChain, branch, k + step) -
                           dispersion_closed_form(kReferenceChain, branch, k - step)) /
                  (2 * step);
      double v = group_velocity(kReferenceChain, branch, k);
      if (fd > 1e-9) worst = std::max(worst, std::abs(v - fd) / fd);
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("group velocity vanishes at band edges and peaks in the acoustic branch") {
  CHECK(group_velocity(kReferenceChain, Branch::acoustic, 1e-7) < 1e-4);
  CHECK(group_velocity(kReferenceChain, Branch::acoustic, M_PI / 2) < 1e-10);
  CHECK(group_velocity(kReferenceChain, Branch::acoustic, M_PI - 1e-7) < 1e-4);

  double v_ac = max_group_velocity(kReferenceChain, Branch::acoustic);
  double v_op = max_group_velocity(kReferenceChain, Branch::optical);
  CHECK(v_ac > v_op);
  // dense-grid reference for the acoustic maximum
  double ref = 0;
  for (int i = 1; i < 200000; ++i)
    ref = std::max(ref, group_velocity(kReferenceChain, Branch::acoustic, M_PI * i / 200000.0));
  CHECK(v_ac == Approx(ref).epsilon(1e-8));
  CHECK(v_ac == Approx(0.1296).epsilon(1e-3));

  // g = h: velocity stays finite and continuous through k = pi/2
  ChainParams mono{20, 0.3, 0.1, 0.1};
  double at_edge = group_velocity(mono, Branch::acoustic, M_PI / 2);
  double near_edge = group_velocity(mono, Branch::acoustic, M_PI / 2 - 1e-9);
  CHECK(at_edge == Approx(near_edge).epsilon(1e-6));
}

TEST_CASE("mode couplings pick up the first-site amplitudes") {
  NormalModes nm = diagonalize(build_bath_potential(kReferenceChain));
  Eigen::VectorXd gs = mode_couplings(nm, 1e-4);
  REQUIRE(gs.size() == 225);
  CHECK(gs.squaredNorm() == Approx(1e-8).epsilon(1e-12));
  CHECK(mode_couplings(nm, 0.0).cwiseAbs().maxCoeff() == 0.0);
}
