// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ia/channel.hpp"
#include "ia/numeric.hpp"
#include "ia/rational.hpp"
#include "ia/report.hpp"

namespace ia {

// The SIMO construction lives in the M=1, N=R orientation: K users, one
// transmit antenna each, R receive antennas, K > R+1.

// Generator index set A: the (receiver, transmitter) pairs whose T-matrix
// blocks generate the precoder product sets. |A| = K(K-R-1); each pair
// carries R diagonal blocks, for gamma = K*R*(K-R-1) generator slots.
struct AlignmentIndexSet {
  int users = 0;  // K
  int ratio = 0;  // R
  std::vector<std::pair<int, int>> pairs;  // 1-based (k, j)
  long long gamma = 0;

  int slot_count() const { return static_cast<int>(pairs.size()) * ratio; }
  // Slot order: pair index major, block index i = 1..R minor.
  int slot(int pair_index, int i) const { return pair_index * ratio + i - 1; }
  int pair_of(int k, int j) const;  // index into pairs, -1 when absent
};

AlignmentIndexSet build_index_set(int users, int ratio);

// Transmitters stacked (and inverted) at receiver k: {1..R+1}\{k} when
// k <= R+1, otherwise {1..R}.
std::vector<int> stacked_transmitters(int k, int ratio);

// Diagonals of the T-matrix blocks. Entry kappa of T[kj]_i is
// u[ki](kappa) . h[kj](kappa): row i of the inverted per-slot R x R stack
// times the cross-channel vector. Pairs with j = R+1 carry the extra
// right-factor T[1(R+2)]_1, elementwise.
struct TMatrixFamily {
  int ratio = 0;
  int mu = 0;
  std::vector<std::pair<int, int>> pairs;
  std::vector<Vector> diagonals;  // [pair_index * R + (i-1)], length mu

  const Vector& diagonal(int pair_index, int i) const {
    return diagonals[static_cast<std::size_t>(pair_index) * ratio + i - 1];
  }
  double min_entry_magnitude() const;
};

TMatrixFamily build_t_family(const ExtendedChannel& ext,
                             const AlignmentIndexSet& idx,
                             double condition_limit = 1e8);

// One column of the product sets, as the exponent applied to each generator
// slot. Ordering matches AlignmentIndexSet::slot.
using ExponentTuple = std::vector<int>;

struct SimoPrecoders {
  int users = 0;
  int ratio = 0;
  int order = 0;  // n
  long long mu = 0;
  Matrix v1;  // mu x R(n+1)^gamma, unit columns
  Matrix v2;  // mu x R n^gamma, unit columns
  std::vector<ExponentTuple> v1_tags, v2_tags;
  std::vector<double> v1_norms, v2_norms;  // pre-normalization column norms
  // Which V1 columns play the role of V1_u = T[1(R+2)]_1 V2 (one per V2
  // column); a labeling choice, recorded rather than asserted unique.
  std::vector<int> v1_u_columns;
  Rational epsilon_n;  // per-user deficit of the short users

  int streams(int user) const;  // d over the extended channel
};

SimoPrecoders build_precoders(const TMatrixFamily& t,
                              const AlignmentIndexSet& idx, int order);

// Inclusive per-slot exponent intervals, one rectangle per union block m.
struct ExponentRanges {
  // blocks[m][slot] = {lo, hi}
  std::vector<std::vector<std::pair<int, int>>> blocks;
};

ExponentRanges v1_exponent_ranges(int slot_count, int ratio, int order);
ExponentRanges v2_exponent_ranges(int slot_count, int ratio, int order);

struct SymbolicCertificate {
  bool pass = false;
  long long equations = 0;  // K*R*(K-R-1) generator increments checked
  // Populated on failure: incrementing `slot` maps V2 block `block` outside
  // every V1 rectangle; `witness` is a concrete escaped tuple.
  int block = -1;
  int slot = -1;
  ExponentTuple witness;
  std::string detail;
};

// Exponent-only alignment check: for every generator slot, shifting the V2
// tuple set by one lands inside the V1 tuple set. No mu-sized data is built,
// so arbitrarily large (K, R, n) are fine.
SymbolicCertificate verify_alignment_symbolic(int users, int ratio, int order);
SymbolicCertificate verify_alignment_symbolic(const AlignmentIndexSet& idx,
                                              const ExponentRanges& v1,
                                              const ExponentRanges& v2);

AlignmentReport verify_alignment_numeric(const SimoPrecoders& p,
                                         const ExtendedChannel& ext,
                                         double eps = kDefaultSvdEps);

// Worst collinearity residual between T[kj]_i * v2-column and the V1 column
// its shifted tag points at; scale-free, so it stays tiny even where the
// stacked matrices are too ill-conditioned for rank tests.
double column_match_residual(const SimoPrecoders& p, const TMatrixFamily& t,
                             const AlignmentIndexSet& idx);

// gamma = K*R*(K-R-1), mu = (R+1)(n+1)^gamma; throws std::domain_error when
// mu exceeds the cap.
std::pair<long long, long long> gamma_mu(int users, int ratio, int order,
                                         long long mu_cap = 4096);

// ((R+1) R (n+1)^gamma + (K-R-1) R n^gamma) / ((R+1)(n+1)^gamma), exact.
Rational achieved_dof(int users, int ratio, int order);

}  // namespace ia
