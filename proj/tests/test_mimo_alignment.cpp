// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "ia/mimo_alignment.hpp"
#include "test_support.hpp"

using ia_test::mimo_config;

TEST_CASE("theorem4 allocation policy") {
  CHECK(ia::allocate_dof_theorem4(2, 4) == std::vector<int>{2, 2, 2, 3});
  CHECK(ia::allocate_dof_theorem4(3, 5) == std::vector<int>{3, 3, 3, 3, 4});
  CHECK(ia::allocate_dof_theorem4(2, 7) == std::vector<int>{4, 4, 4, 4});

  auto d35 = ia::allocate_dof_theorem4(3, 5);
  CHECK(std::accumulate(d35.begin(), d35.end(), 0) == 16);  // 15 + floor(15/14)
  for (int d : d35) {
    CHECK(d >= 3);  // R * floor(RM/(R^2+2R-1))
    CHECK(d <= 5);
  }
  auto d27 = ia::allocate_dof_theorem4(2, 7);
  CHECK(std::accumulate(d27.begin(), d27.end(), 0) == 16);  // 14 + floor(14/7)
  for (int d : d27) {
    CHECK(d >= 4);
    CHECK(d <= 7);
  }

  CHECK_THROWS_AS(ia::allocate_dof_theorem4(1, 5), std::invalid_argument);
  CHECK_THROWS_AS(ia::allocate_dof_theorem4(2, 3), std::invalid_argument);
}

namespace {

void check_alignment_counts(const ia::ChannelSet& ch, const ia::PrecoderSet& p,
                            int aligned_per_receiver) {
  ia::AlignmentReport rep = ia::verify_constant_alignment(ch, p);
  CHECK(rep.pass);
  for (const auto& c : rep.receivers) {
    if (c.streams == 0) continue;
    CHECK(c.interference_rank <= c.interference_cap);
    // raw count minus achieved rank: at least this many vectors fell into
    // the span of the others
    CHECK(c.interference_cols - c.interference_rank >= aligned_per_receiver);
    CHECK(c.joint_rank == c.interference_rank + c.streams);
  }
}

}  // namespace

TEST_CASE("theorem4 at (R=2, M=4): the worked 4-user example") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 4, 8, 101), 1);
  ia::PrecoderSet p = ia::build_theorem4(ch, 2, 4);
  CHECK(p.scheme == ia::Scheme::theorem4);
  CHECK(p.allocation == std::vector<int>{2, 2, 2, 3});
  CHECK(p.total_dof() == ia::Rational(9));
  CHECK(p.extension == 1);
  CHECK(p.eigen_angle < 1e-7);
  CHECK_FALSE(p.boundary_fallback);
  check_alignment_counts(ch, p, 1);

  ia::AlignmentReport rep = ia::verify_constant_alignment(ch, p);
  for (const auto& c : rep.receivers) {
    CHECK(c.joint_rank == 8);
    CHECK(c.interference_cols == 9 - c.streams);
    CHECK(c.interference_rank <= 8 - c.streams);
  }
}

TEST_CASE("theorem4 at (R=3, M=5)") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(5, 5, 15, 103), 1);
  ia::PrecoderSet p = ia::build_theorem4(ch, 3, 5);
  CHECK(p.total_dof() == ia::Rational(16));
  CHECK(p.eigen_angle < 1e-7);
  check_alignment_counts(ch, p, 1);  // f = 1 aligned vector per receiver
}

TEST_CASE("theorem4 below its regime falls back to zero forcing") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 3, 6, 107), 1);
  ia::PrecoderSet p = ia::build_theorem4(ch, 2, 3);
  CHECK(p.boundary_fallback);
  CHECK(p.scheme == ia::Scheme::zero_forcing);
  CHECK(p.allocation == std::vector<int>{3, 3, 0, 0});
  CHECK(p.total_dof() == ia::Rational(6));  // RM
  ia::AlignmentReport rep = ia::verify_constant_alignment(ch, p);
  CHECK(rep.pass);
}

TEST_CASE("theorem4 precoders have full column rank and unit columns") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 4, 8, 109), 1);
  ia::PrecoderSet p = ia::build_theorem4(ch, 2, 4);
  for (const auto& v : p.precoders) {
    CHECK(ia_test::oracle_rank(v) == v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c)
      CHECK(std::abs(v.col(c).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("theorem5 at (R=2, M=2): 9 streams over 2 uses") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 2, 4, 111), 2);
  ia::PrecoderSet p = ia::build_theorem5(ch, 2, 2);
  CHECK(p.extension == 2);
  CHECK(p.allocation == std::vector<int>{2, 3, 2, 2});  // extra stream on user 2
  CHECK(p.total_dof() == ia::Rational(9, 2));
  CHECK(p.chain_residual < 1e-9);
  check_alignment_counts(ch, p, 1);
  for (const auto& v : p.precoders) CHECK(v.cwiseAbs().minCoeff() > 0.0);
}

TEST_CASE("theorem5 at (R=2, M=3): E = 2, total 13") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 3, 6, 113), 2);
  ia::PrecoderSet p = ia::build_theorem5(ch, 2, 3);
  CHECK(p.extension == 2);
  CHECK(p.total_dof() == ia::Rational(13, 2));
  CHECK(p.chain_residual < 1e-9);
  check_alignment_counts(ch, p, 1);
}

TEST_CASE("theorem5 at (R=3, M=2): chain solves but separability degenerates") {
  // E = ceil(5/2) = 3 exceeds M = 2. Every chained vector has slot matrix
  // A * S with S the reshaped seed, so all structured signals live in a
  // subspace that right-multiplication cannot leave; the direct channel
  // (acting from the left) keeps the desired signal inside the interference
  // span and zero forcing has nothing to project onto.
  ia::ChannelSet ch = ia::sample_channels(mimo_config(5, 2, 6, 117), 3);
  ia::PrecoderSet p = ia::build_theorem5(ch, 3, 2);
  CHECK(p.extension == 3);
  CHECK(std::accumulate(p.allocation.begin(), p.allocation.end(), 0) == 19);
  CHECK(p.allocation[1] >= 4);  // user 2 carries R+1 structured streams
  CHECK(p.total_dof() == ia::Rational(19, 3));
  CHECK(p.chain_residual < 1e-9);

  ia::AlignmentReport rep = ia::verify_constant_alignment(ch, p);
  CHECK_FALSE(rep.pass);
  bool any_swallowed = false;
  for (const auto& c : rep.receivers)
    any_swallowed =
        any_swallowed || c.joint_rank < c.interference_rank + c.streams;
  CHECK(any_swallowed);
}

TEST_CASE("theorem5 rejects out-of-regime antenna counts") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 4, 8, 119), 2);
  CHECK_THROWS_AS(ia::build_theorem5(ch, 2, 4), std::invalid_argument);
  ia::ChannelSet ch1 = ia::sample_channels(mimo_config(4, 1, 2, 119), 4);
  CHECK_THROWS_AS(ia::build_theorem5(ch1, 2, 1), std::invalid_argument);
}

TEST_CASE("example2: printed allocation with the extra stream on user 4") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 2, 4, 121), 2);
  ia::PrecoderSet p = ia::build_example2(ch);
  CHECK(p.scheme == ia::Scheme::example2);
  CHECK(p.allocation == std::vector<int>{2, 2, 2, 3});
  CHECK(p.total_dof() == ia::Rational(9, 2));
  CHECK(p.chain_residual < 1e-9);
  check_alignment_counts(ch, p, 1);

  ia::AlignmentReport rep = ia::verify_constant_alignment(ch, p);
  for (const auto& c : rep.receivers) {
    CHECK(c.joint_rank == 8);
    CHECK(c.interference_cols == 9 - c.streams);  // count = RME - d_i + 1
    CHECK(c.interference_rank <= 8 - c.streams);
  }
}

TEST_CASE("example1 is the (R=2, M=4) eigenvector scheme") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 4, 8, 123), 1);
  ia::PrecoderSet p = ia::build_example1(ch);
  CHECK(p.scheme == ia::Scheme::example1);
  CHECK(p.allocation == std::vector<int>{2, 2, 2, 3});
  CHECK(ia::verify_constant_alignment(ch, p).pass);
}

TEST_CASE("zero forcing: feasible counts and rejections") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(2, 2, 4, 131), 1);
  ia::PrecoderSet p = ia::build_zero_forcing(ch, 2);
  CHECK(p.allocation == std::vector<int>{2, 2});
  CHECK(p.total_dof() == ia::Rational(4));
  CHECK(ia::verify_constant_alignment(ch, p).pass);

  ia::ChannelSet orth = ia::sample_channels(mimo_config(3, 1, 3, 133), 1);
  ia::PrecoderSet po = ia::build_zero_forcing(orth, 3);
  CHECK(po.total_dof() == ia::Rational(3));
  CHECK(ia::verify_constant_alignment(orth, po).pass);

  ia::ChannelSet bad = ia::sample_channels(mimo_config(3, 2, 4, 137), 1);
  CHECK_THROWS_AS(ia::build_zero_forcing(bad, 3), std::invalid_argument);

  ia::ChannelSet miso = ia::sample_channels(mimo_config(2, 2, 1, 139), 1);
  CHECK_THROWS_AS(ia::build_zero_forcing(miso, 2), std::invalid_argument);
}

TEST_CASE("separability survives fresh direct channels") {
  ia::ChannelSet ch = ia::sample_channels(mimo_config(4, 4, 8, 141), 1);
  ia::PrecoderSet p = ia::build_example1(ch);
  ia::ChannelSet ch2 = ia::sample_channels(mimo_config(4, 2, 4, 143), 2);
  ia::PrecoderSet p2 = ia::build_example2(ch2);
  for (std::uint64_t salt = 1; salt <= 3; ++salt) {
    CHECK(ia::verify_constant_alignment(ia::resample_direct_channels(ch, salt),
                                        p)
              .pass);
    CHECK(ia::verify_constant_alignment(
              ia::resample_direct_channels(ch2, salt), p2)
              .pass);
  }
}

TEST_CASE("schemes require constant channels") {
  ia::SystemConfig cfg = mimo_config(4, 4, 8, 151);
  cfg.variation = ia::Variation::time_varying;
  ia::ChannelSet ch = ia::sample_channels(cfg, 1);
  CHECK_THROWS_AS(ia::build_theorem4(ch, 2, 4), std::invalid_argument);
}

TEST_CASE("scheme names round-trip") {
  for (ia::Scheme s :
       {ia::Scheme::zero_forcing, ia::Scheme::theorem4, ia::Scheme::theorem5,
        ia::Scheme::example1, ia::Scheme::example2})
    CHECK(ia::scheme_from_name(ia::scheme_name(s)) == s);
  CHECK(ia::scheme_from_name("zf") == ia::Scheme::zero_forcing);
  CHECK_THROWS_AS(ia::scheme_from_name("nope"), std::invalid_argument);
}
