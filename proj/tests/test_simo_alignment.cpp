// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>

#include "ia/simo_alignment.hpp"
#include "test_support.hpp"

using ia_test::simo_config;

namespace {

struct SmallInstance {
  ia::ChannelSet channels;
  ia::ExtendedChannel ext;
  ia::AlignmentIndexSet idx;
  ia::TMatrixFamily fam;
};

SmallInstance make_instance(int users, int ratio, int mu, std::uint64_t seed) {
  ia::ChannelSet ch = ia::sample_channels(simo_config(users, ratio, seed), mu);
  ia::ExtendedChannel ext = ia::extend_channel(ch, mu, 0);
  ia::AlignmentIndexSet idx = ia::build_index_set(users, ratio);
  ia::TMatrixFamily fam = ia::build_t_family(ext, idx);
  return {std::move(ch), std::move(ext), std::move(idx), std::move(fam)};
}

// Dense stacked inverse, the oracle the diagonal construction is checked
// against at small sizes.
ia::Matrix dense_t(const ia::ExtendedChannel& ext, int k, int j, int ratio) {
  const int mu = ext.mu;
  ia::Matrix stack(static_cast<Eigen::Index>(ratio) * mu,
                   static_cast<Eigen::Index>(ratio) * mu);
  auto txs = ia::stacked_transmitters(k, ratio);
  for (int c = 0; c < ratio; ++c)
    stack.middleCols(static_cast<Eigen::Index>(mu) * c, mu) = ext.at(k, txs[c]);
  return stack.inverse() * ext.at(k, j);
}

}  // namespace

TEST_CASE("gamma and mu bookkeeping") {
  CHECK(ia::gamma_mu(4, 2, 1) == std::pair<long long, long long>(8, 768));
  CHECK(ia::gamma_mu(3, 1, 1) == std::pair<long long, long long>(3, 16));
  CHECK_THROWS_AS(ia::gamma_mu(5, 2, 1), std::domain_error);  // mu = 3*2^20
  CHECK_THROWS_AS(ia::gamma_mu(3, 2, 1), std::invalid_argument);  // K <= R+1
  CHECK_THROWS_AS(ia::gamma_mu(4, 2, 0), std::invalid_argument);
  CHECK(ia::gamma_mu(5, 2, 1, 1 << 22).second == 3LL << 20);
}

TEST_CASE("index set enumerates A exactly") {
  ia::AlignmentIndexSet idx = ia::build_index_set(4, 2);
  std::vector<std::pair<int, int>> want{{1, 4}, {2, 4}, {3, 4}, {4, 3}};
  CHECK(idx.pairs == want);
  CHECK(idx.gamma == 8);
  CHECK(idx.slot_count() == 8);

  CHECK(ia::build_index_set(5, 2).pairs.size() == 10);
  for (int r = 1; r <= 3; ++r) {
    ia::AlignmentIndexSet base = ia::build_index_set(r + 2, r);
    CHECK(static_cast<int>(base.pairs.size()) == r + 2);
  }
  CHECK_THROWS_AS(ia::build_index_set(3, 2), std::invalid_argument);
}

TEST_CASE("T diagonals match the row-of-inverse oracle") {
  SmallInstance inst = make_instance(4, 2, 8, 17);
  // adjugate-over-determinant inverse of the 2x2 slot stack
  auto oracle_entry = [&](int k, int j, int kappa, int i) {
    auto txs = ia::stacked_transmitters(k, 2);
    ia::Complex a = inst.channels.at(k, txs[0], kappa)(0, 0);
    ia::Complex c = inst.channels.at(k, txs[0], kappa)(1, 0);
    ia::Complex b = inst.channels.at(k, txs[1], kappa)(0, 0);
    ia::Complex d = inst.channels.at(k, txs[1], kappa)(1, 0);
    ia::Complex det = a * d - b * c;
    ia::Matrix u(2, 2);
    u << d / det, -b / det, -c / det, a / det;
    ia::Vector h = inst.channels.at(k, j, kappa).col(0);
    return ia::Complex((u.row(i - 1) * h)(0));
  };
  for (std::size_t p = 0; p < inst.idx.pairs.size(); ++p) {
    auto [k, j] = inst.idx.pairs[p];
    for (int kappa = 0; kappa < 8; ++kappa) {
      for (int i = 1; i <= 2; ++i) {
        ia::Complex expected = oracle_entry(k, j, kappa, i);
        // pairs (k, R+1) carry the extra right factor T[1(R+2)]_1
        if (j == 3) expected *= oracle_entry(1, 4, kappa, 1);
        CHECK(std::abs(inst.fam.diagonal(static_cast<int>(p), i)(kappa) -
                       expected) < 1e-12 * std::abs(expected));
      }
    }
  }
}

TEST_CASE("constant channels give constant T diagonals") {
  ia::ChannelSet ch = ia::sample_channels(
      simo_config(4, 2, 3, ia::Variation::constant), 8);
  ia::ExtendedChannel ext = ia::extend_channel(ch, 8, 0);
  ia::AlignmentIndexSet idx = ia::build_index_set(4, 2);
  ia::TMatrixFamily fam = ia::build_t_family(ext, idx);
  for (const auto& diag : fam.diagonals)
    for (int kappa = 1; kappa < 8; ++kappa)
      CHECK(diag(kappa) == diag(0));
}

TEST_CASE("stack times stacked blocks reconstructs the cross channel") {
  SmallInstance inst = make_instance(4, 2, 8, 19);
  const int mu = 8, R = 2;
  for (std::size_t p = 0; p < inst.idx.pairs.size(); ++p) {
    auto [k, j] = inst.idx.pairs[p];
    if (j == R + 1) continue;  // carries the extra factor by design
    ia::Matrix stack(R * mu, R * mu);
    auto txs = ia::stacked_transmitters(k, R);
    for (int c = 0; c < R; ++c)
      stack.middleCols(mu * c, mu) = inst.ext.at(k, txs[c]);
    ia::Matrix blocks(R * mu, mu);
    for (int i = 1; i <= R; ++i)
      blocks.middleRows(mu * (i - 1), mu) =
          inst.fam.diagonal(static_cast<int>(p), i).asDiagonal();
    ia::Matrix recon = stack * blocks;
    double rel = (recon - inst.ext.at(k, j)).norm() / inst.ext.at(k, j).norm();
    CHECK(rel < 1e-9);
  }
}

TEST_CASE("dense inverse cross-check: T blocks are diagonal") {
  SmallInstance inst = make_instance(3, 1, 16, 23);
  for (std::size_t p = 0; p < inst.idx.pairs.size(); ++p) {
    auto [k, j] = inst.idx.pairs[p];
    if (j == 2) continue;  // special pair, factor applied after the inverse
    ia::Matrix dense = dense_t(inst.ext, k, j, 1);
    ia::Matrix diag_only = dense.diagonal().asDiagonal();
    CHECK((dense - diag_only).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((dense.diagonal() - inst.fam.diagonal(static_cast<int>(p), 1))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }

  SmallInstance wide = make_instance(4, 2, 8, 29);
  for (std::size_t p = 0; p < wide.idx.pairs.size(); ++p) {
    auto [k, j] = wide.idx.pairs[p];
    if (j == 3) continue;
    ia::Matrix dense = dense_t(wide.ext, k, j, 2);
    for (int i = 1; i <= 2; ++i) {
      ia::Matrix block = dense.middleRows(8 * (i - 1), 8);
      ia::Matrix diag_only = block.diagonal().asDiagonal();
      CHECK((block - diag_only).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("diagonal products commute exactly") {
  SmallInstance inst = make_instance(4, 2, 8, 31);
  ia::CounterRng rng(77);
  const int slots = inst.idx.slot_count();
  for (int probe = 0; probe < 200; ++probe) {
    int a = static_cast<int>(rng.word({1, static_cast<std::uint64_t>(probe)}) %
                             slots);
    int b = static_cast<int>(rng.word({2, static_cast<std::uint64_t>(probe)}) %
                             slots);
    ia::Vector ab =
        inst.fam.diagonals[a].cwiseProduct(inst.fam.diagonals[b]);
    ia::Vector ba =
        inst.fam.diagonals[b].cwiseProduct(inst.fam.diagonals[a]);
    CHECK(ab == ba);  // bitwise: scalar multiplication commutes in IEEE
  }
}

TEST_CASE("precoder cardinalities and tags") {
  SmallInstance inst = make_instance(3, 1, 16, 37);
  ia::SimoPrecoders p = ia::build_precoders(inst.fam, inst.idx, 1);
  CHECK(p.v1.cols() == 8);   // R(n+1)^gamma = 2^3
  CHECK(p.v2.cols() == 1);   // R n^gamma
  CHECK(p.mu == 16);
  CHECK(p.streams(1) == 8);
  CHECK(p.streams(3) == 1);
  CHECK(p.epsilon_n == ia::Rational(7, 16));

  // every tag inside the block bound R(n+1)
  for (const auto& tag : p.v1_tags)
    for (int e : tag) {
      CHECK(e >= 1);
      CHECK(e <= 2);  // R(n+1) with R=1, n=1
    }

  // all-distinct tags, unit columns, nonzero entries
  std::set<ia::ExponentTuple> tags(p.v1_tags.begin(), p.v1_tags.end());
  CHECK(tags.size() == p.v1_tags.size());
  for (Eigen::Index c = 0; c < p.v1.cols(); ++c)
    CHECK(std::abs(p.v1.col(c).norm() - 1.0) < 1e-12);
  CHECK(p.v1.cwiseAbs().minCoeff() > 0.0);
  CHECK(p.v2.cwiseAbs().minCoeff() > 0.0);

  // V1_u labeling: shifted V2 tags, recorded per column
  CHECK(p.v1_u_columns.size() == 1);
  ia::ExponentTuple shifted = p.v2_tags[0];
  int base_slot = inst.idx.slot(inst.idx.pair_of(1, 3), 1);
  ++shifted[base_slot];
  CHECK(p.v1_tags[p.v1_u_columns[0]] == shifted);

  CHECK_THROWS_AS(ia::build_precoders(inst.fam, inst.idx, 2),
                  std::invalid_argument);
}

TEST_CASE("cardinality ratio |V1|/mu = R/(R+1)") {
  SmallInstance inst = make_instance(3, 1, 16, 41);
  for (int n : {1}) {
    ia::SimoPrecoders p = ia::build_precoders(inst.fam, inst.idx, n);
    CHECK(ia::Rational(static_cast<long long>(p.v1.cols()), p.mu) ==
          ia::Rational(p.ratio, p.ratio + 1));
  }
  SmallInstance inst2 = make_instance(3, 1, 54, 41);
  ia::SimoPrecoders p2 = ia::build_precoders(inst2.fam, inst2.idx, 2);
  CHECK(ia::Rational(static_cast<long long>(p2.v1.cols()), p2.mu) ==
        ia::Rational(1, 2));
}

TEST_CASE("zero diagonal entry is rejected with a diagnostic") {
  SmallInstance inst = make_instance(3, 1, 16, 43);
  ia::TMatrixFamily broken = inst.fam;
  broken.diagonals[0](5) = 0.0;
  CHECK_THROWS_AS(ia::build_precoders(broken, inst.idx, 1),
                  ia::NumericalError);
}

TEST_CASE("symbolic alignment passes on the supported grid") {
  for (int r = 1; r <= 3; ++r)
    for (int k = r + 2; k <= r + 4; ++k)
      for (int n = 1; n <= 3; ++n) {
        ia::SymbolicCertificate cert = ia::verify_alignment_symbolic(k, r, n);
        CHECK(cert.pass);
        CHECK(cert.equations ==
              static_cast<long long>(k) * r * (k - r - 1));
      }
}

TEST_CASE("symbolic alignment agrees with brute-force tuple enumeration") {
  // small enough to enumerate V2 outright: (4, 2, 1) has 2 tuples
  ia::AlignmentIndexSet idx = ia::build_index_set(4, 2);
  const int slots = idx.slot_count();
  auto in_v1 = [&](const ia::ExponentTuple& t) {
    for (int m = 0; m < 2; ++m) {
      int lo = m * 1 + m + 1, hi = (m + 1) * 1 + m + 1;
      bool all = true;
      for (int e : t) all = all && e >= lo && e <= hi;
      if (all) return true;
    }
    return false;
  };
  std::vector<ia::ExponentTuple> v2;
  for (int m = 0; m < 2; ++m) v2.emplace_back(slots, m == 0 ? 1 : 3);
  bool brute = true;
  for (const auto& t : v2)
    for (int s = 0; s < slots; ++s) {
      ia::ExponentTuple shifted = t;
      ++shifted[s];
      brute = brute && in_v1(shifted);
    }
  CHECK(brute);
  CHECK(ia::verify_alignment_symbolic(4, 2, 1).pass == brute);
}

TEST_CASE("shrunken exponent range fails with a concrete witness") {
  ia::AlignmentIndexSet idx = ia::build_index_set(4, 2);
  ia::ExponentRanges v1 = ia::v1_exponent_ranges(idx.slot_count(), 2, 1);
  ia::ExponentRanges v2 = ia::v2_exponent_ranges(idx.slot_count(), 2, 1);

  SUBCASE("shrink a V1 block from above") {
    v1.blocks[1][2].second -= 1;
    ia::SymbolicCertificate cert = ia::verify_alignment_symbolic(idx, v1, v2);
    CHECK_FALSE(cert.pass);
    REQUIRE(static_cast<int>(cert.witness.size()) == idx.slot_count());
    // the witness really is outside every V1 rectangle
    for (const auto& rect : v1.blocks) {
      bool inside = true;
      for (int s = 0; s < idx.slot_count(); ++s)
        inside = inside && cert.witness[s] >= rect[s].first &&
                 cert.witness[s] <= rect[s].second;
      CHECK_FALSE(inside);
    }
    // and inside the shifted V2 rectangle it certifies
    for (int s = 0; s < idx.slot_count(); ++s) {
      auto [lo, hi] = v2.blocks[cert.block][s];
      if (s == cert.slot) {
        ++lo;
        ++hi;
      }
      CHECK(cert.witness[s] >= lo);
      CHECK(cert.witness[s] <= hi);
    }
  }

  SUBCASE("shrink a V1 block from below") {
    v1.blocks[0][0].first += 1;
    ia::SymbolicCertificate cert = ia::verify_alignment_symbolic(idx, v1, v2);
    CHECK_FALSE(cert.pass);
    bool outside_all = true;
    for (const auto& rect : v1.blocks) {
      bool inside = true;
      for (int s = 0; s < idx.slot_count(); ++s)
        inside = inside && cert.witness[s] >= rect[s].first &&
                 cert.witness[s] <= rect[s].second;
      outside_all = outside_all && !inside;
    }
    CHECK(outside_all);
  }
}

TEST_CASE("numeric verification at mu = 16") {
  SmallInstance inst = make_instance(3, 1, 16, 47);
  ia::SimoPrecoders p = ia::build_precoders(inst.fam, inst.idx, 1);
  ia::AlignmentReport rep = ia::verify_alignment_numeric(p, inst.ext);
  CHECK(rep.pass);
  REQUIRE(rep.receivers.size() == 3);
  for (const auto& c : rep.receivers) {
    CHECK(c.separable);
    CHECK(c.interference_rank <= 16 - c.streams);  // R*mu - d_k with R = 1
    CHECK(c.desired_rank == c.streams);
    CHECK(c.joint_rank == c.interference_rank + c.streams);
  }
  CHECK(rep.receivers[0].streams == 8);
  CHECK(rep.receivers[2].streams == 1);

  // independent oracle on the same stacks
  ia::Matrix intf(16, 9);
  intf.leftCols(8) = inst.ext.at(1, 2) * p.v1;
  intf.rightCols(1) = inst.ext.at(1, 3) * p.v2;
  CHECK(ia_test::oracle_rank(intf) == rep.receivers[0].interference_rank);
}

TEST_CASE("numeric verification at mu = 54 (n = 2)") {
  SmallInstance inst = make_instance(3, 1, 54, 53);
  ia::SimoPrecoders p = ia::build_precoders(inst.fam, inst.idx, 2);
  CHECK(p.v1.cols() == 27);
  CHECK(p.v2.cols() == 8);
  ia::AlignmentReport rep = ia::verify_alignment_numeric(p, inst.ext);
  CHECK(rep.pass);
  CHECK(ia::column_match_residual(p, inst.fam, inst.idx) < 1e-8);
}

TEST_CASE("every T-shifted V2 column is collinear with its V1 column") {
  SmallInstance inst = make_instance(3, 1, 16, 59);
  ia::SimoPrecoders p = ia::build_precoders(inst.fam, inst.idx, 1);
  CHECK(ia::column_match_residual(p, inst.fam, inst.idx) < 1e-8);
}

TEST_CASE("achieved dof values and limits") {
  CHECK(ia::achieved_dof(4, 2, 1) == ia::Rational(1538, 768));
  CHECK(ia::achieved_dof(3, 1, 1) == ia::Rational(17, 16));
  for (int r = 1; r <= 3; ++r)
    for (int k = r + 2; k <= r + 4; ++k) {
      ia::Rational sup(static_cast<long long>(k) * r, r + 1);
      ia::Rational prev(0);
      for (int n = 1; n <= 3; ++n) {
        ia::Rational v = ia::achieved_dof(k, r, n);
        CHECK(v < sup);
        CHECK(v > prev);
        prev = v;
      }
    }
}
