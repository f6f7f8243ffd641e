// SPDX-License-Identifier: Apache-2.0
#include "ia/simo_alignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ia {

namespace {

void check_simo_params(int users, int ratio) {
  if (ratio < 1) throw std::invalid_argument("ratio R must be >= 1");
  if (users <= ratio + 1)
    throw std::invalid_argument("need K > R+1 for the alignment construction");
}

std::string pair_name(const std::pair<int, int>& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

}  // namespace

int AlignmentIndexSet::pair_of(int k, int j) const {
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (pairs[p].first == k && pairs[p].second == j)
      return static_cast<int>(p);
  return -1;
}

AlignmentIndexSet build_index_set(int users, int ratio) {
  check_simo_params(users, ratio);
  AlignmentIndexSet idx;
  idx.users = users;
  idx.ratio = ratio;
  for (int k = 1; k <= ratio + 1; ++k)
    for (int j = ratio + 2; j <= users; ++j) idx.pairs.emplace_back(k, j);
  for (int k = ratio + 2; k <= users; ++k)
    for (int j = ratio + 1; j <= users; ++j)
      if (j != k) idx.pairs.emplace_back(k, j);
  idx.gamma = static_cast<long long>(users) * ratio * (users - ratio - 1);
  if (static_cast<long long>(idx.pairs.size()) * ratio != idx.gamma)
    throw std::logic_error("index set size mismatch");
  return idx;
}

std::vector<int> stacked_transmitters(int k, int ratio) {
  std::vector<int> txs;
  if (k <= ratio + 1) {
    for (int a = 1; a <= ratio + 1; ++a)
      if (a != k) txs.push_back(a);
  } else {
    for (int a = 1; a <= ratio; ++a) txs.push_back(a);
  }
  return txs;
}

double TMatrixFamily::min_entry_magnitude() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& d : diagonals) lo = std::min(lo, d.cwiseAbs().minCoeff());
  return lo;
}

TMatrixFamily build_t_family(const ExtendedChannel& ext,
                             const AlignmentIndexSet& idx,
                             double condition_limit) {
  if (ext.tx_antennas != 1 || ext.rx_antennas != idx.ratio)
    throw std::invalid_argument(
        "T family needs a SIMO extension with M=1, N=R");
  if (ext.users != idx.users)
    throw std::invalid_argument("extension user count mismatch");

  const int R = idx.ratio;
  const int mu = ext.mu;
  TMatrixFamily fam;
  fam.ratio = R;
  fam.mu = mu;
  fam.pairs = idx.pairs;
  fam.diagonals.assign(idx.pairs.size() * R, Vector(mu));

  for (std::size_t p = 0; p < idx.pairs.size(); ++p) {
    const auto [k, j] = idx.pairs[p];
    std::vector<int> txs = stacked_transmitters(k, R);
    Matrix slot_stack(R, R);
    for (int kappa = 0; kappa < mu; ++kappa) {
      for (int c = 0; c < R; ++c)
        slot_stack.col(c) = ext.at(k, txs[c]).block(
            static_cast<Eigen::Index>(R) * kappa, kappa, R, 1);
      if (condition_number(slot_stack) > condition_limit) {
        std::ostringstream os;
        os << "near-singular per-slot stack at receiver " << k << ", slot "
           << kappa << "; resample advised";
        throw NumericalError(os.str());
      }
      Vector target = ext.at(k, j).block(static_cast<Eigen::Index>(R) * kappa,
                                         kappa, R, 1);
      Vector sol = slot_stack.partialPivLu().solve(target);
      for (int i = 1; i <= R; ++i)
        fam.diagonals[p * R + i - 1](kappa) = sol(i - 1);
    }
  }

  // Pairs (k, R+1) carry the extra right-factor T[1(R+2)]_1.
  int base = idx.pair_of(1, R + 2);
  if (base < 0) throw std::logic_error("pair (1, R+2) missing from index set");
  Vector factor = fam.diagonal(base, 1);
  for (std::size_t p = 0; p < idx.pairs.size(); ++p)
    if (idx.pairs[p].second == R + 1)
      for (int i = 1; i <= R; ++i)
        fam.diagonals[p * R + i - 1].array() *= factor.array();

  if (fam.min_entry_magnitude() < 1e-12)
    throw NumericalError(
        "T-matrix diagonal entry numerically zero; resample advised");
  return fam;
}

ExponentRanges v1_exponent_ranges(int slot_count, int ratio, int order) {
  ExponentRanges r;
  for (int m = 0; m < ratio; ++m) {
    int lo = m * order + m + 1;
    int hi = (m + 1) * order + m + 1;
    r.blocks.emplace_back(slot_count, std::make_pair(lo, hi));
  }
  return r;
}

ExponentRanges v2_exponent_ranges(int slot_count, int ratio, int order) {
  ExponentRanges r;
  for (int m = 0; m < ratio; ++m) {
    int lo = m * order + m + 1;
    int hi = (m + 1) * order + m;
    r.blocks.emplace_back(slot_count, std::make_pair(lo, hi));
  }
  return r;
}

std::pair<long long, long long> gamma_mu(int users, int ratio, int order,
                                         long long mu_cap) {
  check_simo_params(users, ratio);
  if (order < 1) throw std::invalid_argument("extension order n must be >= 1");
  long long gamma =
      static_cast<long long>(users) * ratio * (users - ratio - 1);
  long long mu = ratio + 1;
  for (long long i = 0; i < gamma; ++i) {
    mu *= order + 1;
    if (mu > mu_cap) {
      std::ostringstream os;
      os << "mu = (R+1)(n+1)^" << gamma << " exceeds cap " << mu_cap
         << " for K=" << users << " R=" << ratio << " n=" << order;
      throw std::domain_error(os.str());
    }
  }
  return {gamma, mu};
}

Rational achieved_dof(int users, int ratio, int order) {
  check_simo_params(users, ratio);
  if (order < 1) throw std::invalid_argument("extension order n must be >= 1");
  int gamma = users * ratio * (users - ratio - 1);
  BigInt p1 = pow_big(order + 1, gamma);
  BigInt p0 = pow_big(order, gamma);
  BigInt num = BigInt(ratio + 1) * ratio * p1 +
               BigInt(users - ratio - 1) * ratio * p0;
  return Rational(num, BigInt(ratio + 1) * p1);
}

int SimoPrecoders::streams(int user) const {
  return user <= ratio + 1 ? static_cast<int>(v1.cols())
                           : static_cast<int>(v2.cols());
}

namespace {

// Enumerate all tuples of one rectangle (same [lo, hi] for every slot),
// invoking fn(tuple).
template <typename Fn>
void enumerate_block(int slot_count, int lo, int hi, Fn&& fn) {
  if (hi < lo) return;
  ExponentTuple t(slot_count, lo);
  for (;;) {
    fn(t);
    int s = 0;
    while (s < slot_count && t[s] == hi) t[s++] = lo;
    if (s == slot_count) break;
    ++t[s];
  }
}

Rational simo_epsilon(int users, int ratio, int order) {
  int gamma = users * ratio * (users - ratio - 1);
  BigInt p1 = pow_big(order + 1, gamma);
  BigInt p0 = pow_big(order, gamma);
  return Rational(BigInt(ratio) * (p1 - p0), BigInt(ratio + 1) * p1);
}

}  // namespace

SimoPrecoders build_precoders(const TMatrixFamily& t,
                              const AlignmentIndexSet& idx, int order) {
  if (order < 1) throw std::invalid_argument("extension order n must be >= 1");
  const int R = idx.ratio;
  const int slot_count = idx.slot_count();
  {
    long long mu = R + 1;
    for (int i = 0; i < slot_count && mu <= t.mu; ++i) mu *= order + 1;
    if (mu != t.mu)
      throw std::invalid_argument(
          "extension length does not match (R+1)(n+1)^gamma for this n");
  }

  SimoPrecoders p;
  p.users = idx.users;
  p.ratio = R;
  p.order = order;
  p.mu = t.mu;
  p.epsilon_n = simo_epsilon(idx.users, R, order);

  // Power tables: diag^e for e up to the largest exponent R(n+1).
  int max_exp = R * (order + 1);
  std::vector<std::vector<Vector>> powers(slot_count);
  for (int s = 0; s < slot_count; ++s) {
    const Vector& d = t.diagonals[s];
    powers[s].reserve(max_exp);
    powers[s].push_back(d);
    for (int e = 2; e <= max_exp; ++e)
      powers[s].push_back(powers[s].back().cwiseProduct(d));
  }

  auto build_set = [&](const ExponentRanges& ranges, Matrix& out,
                       std::vector<ExponentTuple>& tags,
                       std::vector<double>& norms, const char* which) {
    std::vector<Vector> cols;
    for (const auto& block : ranges.blocks) {
      int lo = block[0].first, hi = block[0].second;
      enumerate_block(slot_count, lo, hi, [&](const ExponentTuple& tup) {
        Vector v = Vector::Ones(t.mu);
        for (int s = 0; s < slot_count; ++s)
          v = v.cwiseProduct(powers[s][tup[s] - 1]);
        double mag = v.cwiseAbs().minCoeff();
        if (mag == 0.0) {
          std::ostringstream os;
          os << which << " column has an exactly-zero entry (tuple";
          for (int e : tup) os << ' ' << e;
          os << "); this is a probability-zero draw, resample";
          throw NumericalError(os.str());
        }
        tags.push_back(tup);
        cols.push_back(std::move(v));
      });
    }
    out.resize(t.mu, static_cast<Eigen::Index>(cols.size()));
    norms.resize(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      norms[c] = cols[c].norm();
      out.col(static_cast<Eigen::Index>(c)) = cols[c] / norms[c];
    }
  };

  build_set(v1_exponent_ranges(slot_count, R, order), p.v1, p.v1_tags,
            p.v1_norms, "V1");
  build_set(v2_exponent_ranges(slot_count, R, order), p.v2, p.v2_tags,
            p.v2_norms, "V2");

  // Record the V1_u labeling: the V1 columns reached from V2 by one
  // application of T[1(R+2)]_1.
  std::map<ExponentTuple, int> v1_index;
  for (std::size_t c = 0; c < p.v1_tags.size(); ++c)
    v1_index[p.v1_tags[c]] = static_cast<int>(c);
  int base_pair = idx.pair_of(1, R + 2);
  int base_slot = idx.slot(base_pair, 1);
  for (const auto& tag : p.v2_tags) {
    ExponentTuple shifted = tag;
    ++shifted[base_slot];
    auto it = v1_index.find(shifted);
    if (it == v1_index.end())
      throw std::logic_error("V1_u labeling: shifted tag missing from V1");
    p.v1_u_columns.push_back(it->second);
  }
  return p;
}

namespace {

bool interval_contains(std::pair<int, int> outer, std::pair<int, int> inner) {
  return outer.first <= inner.first && inner.second <= outer.second;
}

bool intervals_intersect(std::pair<int, int> a, std::pair<int, int> b) {
  return std::max(a.first, b.first) <= std::min(a.second, b.second);
}

bool tuple_in_rect(const ExponentTuple& t,
                   const std::vector<std::pair<int, int>>& rect) {
  for (std::size_t s = 0; s < t.size(); ++s)
    if (t[s] < rect[s].first || t[s] > rect[s].second) return false;
  return true;
}

}  // namespace

SymbolicCertificate verify_alignment_symbolic(int users, int ratio,
                                              int order) {
  AlignmentIndexSet idx = build_index_set(users, ratio);
  return verify_alignment_symbolic(
      idx, v1_exponent_ranges(idx.slot_count(), ratio, order),
      v2_exponent_ranges(idx.slot_count(), ratio, order));
}

SymbolicCertificate verify_alignment_symbolic(const AlignmentIndexSet& idx,
                                              const ExponentRanges& v1,
                                              const ExponentRanges& v2) {
  const int slot_count = idx.slot_count();
  SymbolicCertificate cert;
  cert.equations = idx.gamma;

  // The containment test below treats the V1 rectangles one at a time, which
  // is exact when the rectangles are slotwise disjoint (a product set cannot
  // straddle two of them without leaking a mixed corner).
  for (std::size_t a = 0; a < v1.blocks.size(); ++a)
    for (std::size_t b = a + 1; b < v1.blocks.size(); ++b)
      for (int s = 0; s < slot_count; ++s)
        if (intervals_intersect(v1.blocks[a][s], v1.blocks[b][s]))
          throw std::invalid_argument(
              "V1 exponent rectangles must be slotwise disjoint");

  for (std::size_t m = 0; m < v2.blocks.size(); ++m) {
    const auto& block = v2.blocks[m];
    if (block.empty() || block[0].second < block[0].first) continue;
    for (int s = 0; s < slot_count; ++s) {
      // Shift slot s by one generator application.
      std::vector<std::pair<int, int>> shifted = block;
      shifted[s] = {shifted[s].first + 1, shifted[s].second + 1};

      bool covered = false;
      for (const auto& rect : v1.blocks) {
        bool fits = true;
        for (int q = 0; q < slot_count && fits; ++q)
          fits = interval_contains(rect[q], shifted[q]);
        if (fits) {
          covered = true;
          break;
        }
      }
      if (covered) continue;

      // Build a concrete escaped tuple. Rectangles intersecting the shifted
      // set in every slot are the only ones that could contain points of it.
      std::vector<const std::vector<std::pair<int, int>>*> touching;
      for (const auto& rect : v1.blocks) {
        bool all = true;
        for (int q = 0; q < slot_count && all; ++q)
          all = intervals_intersect(rect[q], shifted[q]);
        if (all) touching.push_back(&rect);
      }

      ExponentTuple witness(slot_count);
      for (int q = 0; q < slot_count; ++q) witness[q] = shifted[q].first;
      if (touching.size() == 1) {
        const auto& rect = *touching[0];
        for (int q = 0; q < slot_count; ++q) {
          if (shifted[q].first < rect[q].first) {
            witness[q] = shifted[q].first;
            break;
          }
          if (shifted[q].second > rect[q].second) {
            witness[q] = shifted[q].second;
            break;
          }
        }
      } else if (touching.size() >= 2) {
        // Mixed corner: slot 0 from one rectangle's overlap, the rest from
        // another's; slotwise disjointness puts it outside both.
        const auto& ra = *touching[0];
        const auto& rb = *touching[1];
        for (int q = 0; q < slot_count; ++q)
          witness[q] = std::max(shifted[q].first, ra[q].first);
        witness[0] = std::max(shifted[0].first, rb[0].first);
      }

      bool escaped = true;
      for (const auto& rect : v1.blocks)
        if (tuple_in_rect(witness, rect)) escaped = false;

      cert.pass = false;
      cert.block = static_cast<int>(m);
      cert.slot = s;
      cert.witness = witness;
      std::ostringstream os;
      const auto& pr = idx.pairs[s / idx.ratio];
      os << "incrementing generator T" << pair_name(pr) << "_"
         << (s % idx.ratio + 1) << " maps V2 block " << m
         << " outside every V1 block";
      if (!escaped) os << " (no single escaped tuple isolated)";
      cert.detail = os.str();
      return cert;
    }
  }
  cert.pass = true;
  return cert;
}

AlignmentReport verify_alignment_numeric(const SimoPrecoders& p,
                                         const ExtendedChannel& ext,
                                         double eps) {
  if (ext.mu != p.mu || ext.users != p.users ||
      ext.rx_antennas != p.ratio || ext.tx_antennas != 1)
    throw std::invalid_argument("extension does not match the precoders");

  const int K = p.users;
  const int R = p.ratio;
  const long long space = static_cast<long long>(R) * p.mu;

  AlignmentReport rep;
  rep.scheme = "simo_alignment";
  rep.svd_eps = eps;
  rep.min_entry_magnitude =
      std::min(p.v1.cwiseAbs().minCoeff(), p.v2.cwiseAbs().minCoeff());
  rep.pass = true;

  auto precoder_of = [&](int user) -> const Matrix& {
    return user <= R + 1 ? p.v1 : p.v2;
  };

  for (int k = 1; k <= K; ++k) {
    ReceiverCheck c;
    c.receiver = k;
    c.streams = p.streams(k);
    c.interference_cap = static_cast<int>(space - c.streams);

    Eigen::Index cols = 0;
    for (int j = 1; j <= K; ++j)
      if (j != k) cols += precoder_of(j).cols();
    Matrix interference(space, cols);
    Eigen::Index at = 0;
    for (int j = 1; j <= K; ++j) {
      if (j == k) continue;
      const Matrix& v = precoder_of(j);
      interference.middleCols(at, v.cols()) = ext.at(k, j) * v;
      at += v.cols();
    }
    Matrix desired = ext.at(k, k) * precoder_of(k);

    c.interference_cols = static_cast<int>(cols);
    c.interference_rank = numeric_rank(interference, eps).rank;
    c.desired_rank = numeric_rank(desired, eps).rank;
    Matrix joint(space, desired.cols() + cols);
    joint << desired, interference;
    c.joint_rank = numeric_rank(joint, eps).rank;
    c.separable = c.desired_rank == c.streams &&
                  c.joint_rank == c.interference_rank + c.streams;
    rep.pass = rep.pass && c.separable &&
               c.interference_rank <= c.interference_cap;
    rep.receivers.push_back(c);
  }
  return rep;
}

double column_match_residual(const SimoPrecoders& p, const TMatrixFamily& t,
                             const AlignmentIndexSet& idx) {
  std::map<ExponentTuple, int> v1_index;
  for (std::size_t c = 0; c < p.v1_tags.size(); ++c)
    v1_index[p.v1_tags[c]] = static_cast<int>(c);

  double worst = 0.0;
  for (std::size_t c = 0; c < p.v2_tags.size(); ++c) {
    for (int s = 0; s < idx.slot_count(); ++s) {
      ExponentTuple shifted = p.v2_tags[c];
      ++shifted[s];
      auto it = v1_index.find(shifted);
      if (it == v1_index.end())
        throw std::logic_error("shifted V2 tag missing from V1 tag set");
      Vector x = t.diagonals[s].cwiseProduct(p.v2.col(c));
      Vector y = p.v1.col(it->second);
      Complex scale = y.dot(x) / y.dot(y);
      double res = (x - scale * y).norm() / x.norm();
      worst = std::max(worst, res);
    }
  }
  return worst;
}

}  // namespace ia
