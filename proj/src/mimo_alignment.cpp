// SPDX-License-Identifier: Apache-2.0
#include "ia/mimo_alignment.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ia {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kRedrawLimit = 8;
constexpr double kConditionLimit = 1e8;

Complex clamped_entry(const CounterRng& rng, std::uint64_t purpose,
                      std::uint64_t a, std::uint64_t b, std::uint64_t c,
                      double lo, double hi) {
  double r = lo + (hi - lo) *
                      rng.unit({stream::kPrecoderMagnitude, purpose, a, b, c});
  double th = kTwoPi * rng.unit({stream::kPrecoderPhase, purpose, a, b, c});
  return {r * std::cos(th), r * std::sin(th)};
}

Matrix random_columns(const CounterRng& rng, std::uint64_t purpose, int user,
                      int rows, int cols, int salt, double lo, double hi) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = clamped_entry(rng, purpose + (static_cast<std::uint64_t>(salt) << 16),
                              static_cast<std::uint64_t>(user), r, c, lo, hi);
  return m;
}

void require_constant(const ChannelSet& channels) {
  if (channels.config().variation != Variation::constant)
    throw std::invalid_argument("scheme requires constant channels");
}

void require_shape(const ChannelSet& channels, int users, int tx, int rx) {
  const auto& cfg = channels.config();
  if (cfg.users != users || cfg.tx_antennas != tx || cfg.rx_antennas != rx) {
    std::ostringstream os;
    os << "channel set must be K=" << users << ", M=" << tx << ", N=" << rx
       << " for this scheme";
    throw std::invalid_argument(os.str());
  }
}

Matrix solve_stack(const Matrix& stack, const Matrix& target) {
  if (condition_number(stack) > kConditionLimit)
    throw NumericalError("near-singular stacked channel matrix; resample");
  return stack.partialPivLu().solve(target);
}

void normalize_columns(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c).normalize();
}

// Full-column-rank guard shared by the builders; redraws are the caller's
// job, this only reports.
bool full_column_rank(const Matrix& m, double eps = kDefaultSvdEps) {
  return numeric_rank(m, eps).rank == m.cols();
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::zero_forcing: return "zero_forcing";
    case Scheme::theorem4: return "theorem4";
    case Scheme::theorem5: return "theorem5";
    case Scheme::example1: return "example1";
    case Scheme::example2: return "example2";
  }
  return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "zero_forcing" || name == "zf") return Scheme::zero_forcing;
  if (name == "theorem4") return Scheme::theorem4;
  if (name == "theorem5") return Scheme::theorem5;
  if (name == "example1") return Scheme::example1;
  if (name == "example2") return Scheme::example2;
  throw std::invalid_argument("unknown scheme: " + name);
}

Rational PrecoderSet::total_dof() const {
  long long total = std::accumulate(allocation.begin(), allocation.end(), 0LL);
  return Rational(total, extension);
}

std::vector<int> allocate_dof_theorem4(int ratio, int tx_antennas) {
  if (ratio < 2) throw std::invalid_argument("need R >= 2");
  if (tx_antennas < ratio + 2)
    throw std::invalid_argument("need M >= R+2 for a positive aligned count");
  const int users = ratio + 2;
  const int f = ratio * tx_antennas / (ratio * ratio + 2 * ratio - 1);
  const int target = ratio * tx_antennas + f;

  std::vector<int> d(users, ratio * f);
  long long sum = static_cast<long long>(users) * ratio * f;
  if (sum > target) throw std::logic_error("infeasible theorem4 allocation");
  int u = users - 1;
  while (sum < target) {
    if (d[u] < tx_antennas) {
      ++d[u];
      ++sum;
    }
    u = (u == 0) ? users - 1 : u - 1;
  }
  return d;
}

PrecoderSet build_theorem4(const ChannelSet& channels, int ratio,
                           int tx_antennas) {
  if (ratio < 2) throw std::invalid_argument("need R >= 2");
  const int users = ratio + 2;
  const int M = tx_antennas;
  const int N = ratio * M;
  require_constant(channels);
  require_shape(channels, users, M, N);

  if (M < ratio + 2) {
    // Below the positive-gain regime only plain zero forcing is available:
    // serve R of the R+2 users with M streams each.
    PrecoderSet zf;
    zf.scheme = Scheme::zero_forcing;
    zf.users = users;
    zf.extension = 1;
    zf.allocation.assign(users, 0);
    zf.boundary_fallback = true;
    CounterRng rng(channels.config().seed);
    for (int i = 1; i <= users; ++i) {
      int d = i <= ratio ? M : 0;
      zf.allocation[i - 1] = d;
      Matrix v(M, d);
      for (int salt = 0; salt <= kRedrawLimit && d > 0; ++salt) {
        v = random_columns(rng, 0x74, i, M, d, salt,
                           channels.config().magnitude_lo,
                           channels.config().magnitude_hi);
        if (full_column_rank(v)) break;
        if (salt == kRedrawLimit)
          throw NumericalError("random precoder stayed rank-deficient");
      }
      normalize_columns(v);
      zf.precoders.push_back(std::move(v));
    }
    return zf;
  }

  const int f = ratio * M / (ratio * ratio + 2 * ratio - 1);
  const auto& cfg = channels.config();

  // T[j]: stacked cross channels at receiver j, inverted against the channel
  // of the user whose block-1 vectors receiver j aligns.
  auto stack_and_target = [&](int j) -> std::pair<std::vector<int>, int> {
    if (j == 1) {
      std::vector<int> txs;
      for (int a = 2; a <= ratio + 1; ++a) txs.push_back(a);
      return {txs, users};
    }
    if (j == 2) {
      std::vector<int> txs{1};
      for (int a = 3; a <= ratio + 1; ++a) txs.push_back(a);
      return {txs, users};
    }
    if (j <= ratio + 1) {
      std::vector<int> txs;
      for (int a = 1; a <= users; ++a)
        if (a != j - 1 && a != j) txs.push_back(a);
      return {txs, j - 1};
    }
    std::vector<int> txs;
    for (int a = 2; a <= ratio + 1; ++a) txs.push_back(a);
    return {txs, 1};
  };

  std::vector<Matrix> T(users + 1);
  std::vector<std::vector<int>> stack_txs(users + 1);
  for (int j = 1; j <= users; ++j) {
    auto [txs, target] = stack_and_target(j);
    Matrix stack(N, static_cast<Eigen::Index>(M) * txs.size());
    for (std::size_t c = 0; c < txs.size(); ++c)
      stack.middleCols(static_cast<Eigen::Index>(M) * c, M) =
          channels.at(j, txs[c], 0);
    T[j] = solve_stack(stack, channels.at(j, target, 0));
    stack_txs[j] = txs;
  }
  auto blk = [&](int j, int i) { return T[j].middleRows(M * (i - 1), M); };

  // Seed: the f dominant eigenvectors of inv(T[2]_R) T[1]_R; largest
  // magnitude first, ties broken by phase then index.
  Matrix eig_target = solve_stack(blk(2, ratio), blk(1, ratio));
  Eigen::ComplexEigenSolver<Matrix> es(eig_target);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigenvalue solve failed; resample channels");
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  const auto& lam = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ma = std::abs(lam(a)), mb = std::abs(lam(b));
    if (ma != mb) return ma > mb;
    double pa = std::arg(lam(a)), pb = std::arg(lam(b));
    if (pa != pb) return pa < pb;
    return a < b;
  });
  Matrix seed(M, f);
  for (int c = 0; c < f; ++c) seed.col(c) = es.eigenvectors().col(order[c]);

  // blocks[user][b] for b = 1..R, each M x f.
  std::vector<std::vector<Matrix>> blocks(users + 1,
                                          std::vector<Matrix>(ratio + 1));
  blocks[users][1] = seed;
  for (int l = 1; l <= ratio - 1; ++l) blocks[l + 1][1] = blk(1, l) * seed;
  blocks[ratio + 1][1] = blk(1, ratio) * seed;  // span representative
  blocks[1][1] = blk(2, 1) * seed;
  for (int l = 2; l <= ratio - 1; ++l) blocks[l + 1][2] = blk(2, l) * seed;

  auto n_index = [&](int i, int j) -> int {
    if ((i == 1 || i == ratio + 1 || i == ratio + 2) && i != j) return j - 1;
    if (1 < i && i < ratio + 1 && j > i + 1) return j - 2;
    if (3 < i && i < ratio + 1 && j < i) return j;
    throw std::logic_error("block index map miss");
  };
  for (int j = 3; j <= ratio + 1; ++j) {
    Matrix prod = T[j] * blocks[j - 1][1];
    for (std::size_t pos = 0; pos < stack_txs[j].size(); ++pos) {
      int i = stack_txs[j][pos];
      blocks[i][n_index(i, j)] =
          prod.middleRows(static_cast<Eigen::Index>(M) * pos, M);
    }
  }
  {
    Matrix prod = T[users] * blocks[1][1];
    for (std::size_t pos = 0; pos < stack_txs[users].size(); ++pos)
      blocks[stack_txs[users][pos]][ratio] =
          prod.middleRows(static_cast<Eigen::Index>(M) * pos, M);
  }

  PrecoderSet out;
  out.scheme = Scheme::theorem4;
  out.users = users;
  out.extension = 1;
  out.allocation = allocate_dof_theorem4(ratio, M);
  out.eigen_angle =
      subspace_angle_sin(blk(1, ratio) * seed, blk(2, ratio) * seed);

  CounterRng rng(cfg.seed);
  for (int i = 1; i <= users; ++i) {
    int structured = ratio * f;
    int extra = out.allocation[i - 1] - structured;
    if (extra < 0) throw std::logic_error("allocation below structured count");
    Matrix v(M, out.allocation[i - 1]);
    for (int b = 1; b <= ratio; ++b)
      v.middleCols(static_cast<Eigen::Index>(f) * (b - 1), f) = blocks[i][b];
    for (int salt = 0; salt <= kRedrawLimit; ++salt) {
      if (extra > 0)
        v.rightCols(extra) = random_columns(rng, 0x75, i, M, extra, salt,
                                            cfg.magnitude_lo, cfg.magnitude_hi);
      if (full_column_rank(v)) break;
      if (salt == kRedrawLimit || extra == 0)
        throw NumericalError("precoder rank-deficient after redraws");
    }
    normalize_columns(v);
    out.precoders.push_back(std::move(v));
  }
  return out;
}

namespace {

// Shared by theorem5 and example2: the chained construction on the
// E-extension, with a role permutation deciding which physical user plays
// which part (identity for the theorem, 2<->4 swap for the example).
PrecoderSet build_chained(const ChannelSet& channels, int ratio,
                          int tx_antennas, const std::vector<int>& role_to_user,
                          Scheme tag) {
  if (ratio < 2) throw std::invalid_argument("need R >= 2");
  const int users = ratio + 2;
  const int M = tx_antennas;
  const int N = ratio * M;
  if (M <= 1 || M >= users)
    throw std::invalid_argument("chained scheme needs 1 < M < R+2");
  require_constant(channels);
  require_shape(channels, users, M, N);
  const int E = (users + M - 1) / M;
  const int Me = M * E;
  const int Ne = N * E;
  const auto& cfg = channels.config();

  if (channels.slots() < E)
    throw std::invalid_argument("need at least E slots for the extension");
  ExtendedChannel ext = extend_channel(channels, E, 0);
  auto H = [&](int role_rx, int role_tx) -> const Matrix& {
    return ext.at(role_to_user[role_rx], role_to_user[role_tx]);
  };

  auto stack_and_target = [&](int j) -> std::pair<std::vector<int>, int> {
    if (j == 1) {
      std::vector<int> txs;
      for (int a = 3; a <= users; ++a) txs.push_back(a);
      return {txs, 2};
    }
    if (j <= ratio + 1) {
      std::vector<int> txs;
      for (int a = 1; a <= users; ++a)
        if (a != j && a != j + 1) txs.push_back(a);
      return {txs, j + 1};
    }
    std::vector<int> txs;
    for (int a = 2; a <= ratio + 1; ++a) txs.push_back(a);
    return {txs, 1};
  };

  // vecs[role][b]: structured vector b of the role user (1-based b).
  std::vector<std::vector<Vector>> vecs(users + 1);
  for (int i = 1; i <= users; ++i)
    vecs[i].assign(static_cast<std::size_t>(ratio) + 2, Vector());

  CounterRng rng(cfg.seed);
  Vector seed(Me);
  for (int r = 0; r < Me; ++r)
    seed(r) = clamped_entry(rng, 0x76, 2, r, 0, cfg.magnitude_lo,
                            cfg.magnitude_hi);
  vecs[2][1] = seed;

  auto n_index = [&](int i, int j) -> int {
    if ((i == 1 || i == 2) && j > i) return j - 1;
    if (i >= 3 && j < i - 1) return j;
    if (i >= 3 && j >= i + 1) return j - 2;
    throw std::logic_error("chain index map miss");
  };

  double worst_residual = 0.0;
  auto propagate = [&](int j, const Vector& source,
                       const std::vector<int>& dest_blocks) {
    auto [txs, target] = stack_and_target(j);
    Matrix stack(Ne, static_cast<Eigen::Index>(Me) * txs.size());
    for (std::size_t c = 0; c < txs.size(); ++c)
      stack.middleCols(static_cast<Eigen::Index>(Me) * c, Me) = H(j, txs[c]);
    Vector rhs = H(j, target) * source;
    Vector sol = solve_stack(stack, rhs);
    Vector recombined = Vector::Zero(Ne);
    for (std::size_t pos = 0; pos < txs.size(); ++pos) {
      Vector piece = sol.segment(static_cast<Eigen::Index>(Me) * pos, Me);
      vecs[txs[pos]][dest_blocks[pos]] = piece;
      recombined += H(j, txs[pos]) * piece;
    }
    worst_residual = std::max(worst_residual,
                              (rhs - recombined).norm() / rhs.norm());
  };

  {  // receiver 1: defines block 1 of users 3..R+2
    auto [txs, target] = stack_and_target(1);
    (void)target;
    std::vector<int> dest(txs.size(), 1);
    propagate(1, vecs[2][1], dest);
  }
  for (int j = 2; j <= ratio + 1; ++j) {
    auto [txs, target] = stack_and_target(j);
    (void)target;
    std::vector<int> dest;
    for (int i : txs) dest.push_back(n_index(i, j));
    propagate(j, vecs[j + 1][1], dest);
  }
  {  // receiver R+2: user 2 gets block R+1, users 3..R+1 get block R
    auto [txs, target] = stack_and_target(users);
    (void)target;
    std::vector<int> dest;
    for (int i : txs) dest.push_back(i == 2 ? ratio + 1 : ratio);
    propagate(users, vecs[1][1], dest);
  }

  // Role allocation: user 2 carries R+1 structured streams, everyone else R;
  // pad to R*M*E + 1 total, last physical user first, capped at M*E.
  std::vector<int> role_d(users + 1, ratio);
  role_d[2] = ratio + 1;
  std::vector<int> d(users, 0);
  for (int role = 1; role <= users; ++role)
    d[role_to_user[role] - 1] = role_d[role];
  const int target_total = ratio * M * E + 1;
  long long sum = std::accumulate(d.begin(), d.end(), 0LL);
  int u = users - 1;
  while (sum < target_total) {
    if (d[u] < Me) {
      ++d[u];
      ++sum;
    }
    u = (u == 0) ? users - 1 : u - 1;
  }

  PrecoderSet out;
  out.scheme = tag;
  out.users = users;
  out.extension = E;
  out.allocation = d;
  out.chain_residual = worst_residual;
  out.precoders.assign(users, Matrix());

  for (int role = 1; role <= users; ++role) {
    int user = role_to_user[role];
    int structured = role_d[role];
    int want = d[user - 1];
    Matrix v(Me, want);
    for (int b = 1; b <= structured; ++b) {
      if (vecs[role][b].size() == 0)
        throw std::logic_error("structured vector missing from chain");
      v.col(b - 1) = vecs[role][b];
    }
    int extra = want - structured;
    for (int salt = 0; salt <= kRedrawLimit; ++salt) {
      if (extra > 0)
        v.rightCols(extra) = random_columns(rng, 0x77, user, Me, extra, salt,
                                            cfg.magnitude_lo, cfg.magnitude_hi);
      if (full_column_rank(v)) break;
      if (salt == kRedrawLimit || extra == 0)
        throw NumericalError("precoder rank-deficient after redraws");
    }
    normalize_columns(v);
    if (v.cwiseAbs().minCoeff() < 1e-12)
      throw NumericalError("extension precoder entry numerically zero");
    out.precoders[user - 1] = std::move(v);
  }
  return out;
}

}  // namespace

PrecoderSet build_theorem5(const ChannelSet& channels, int ratio,
                           int tx_antennas) {
  std::vector<int> identity(ratio + 3);
  std::iota(identity.begin(), identity.end(), 0);
  return build_chained(channels, ratio, tx_antennas, identity,
                       Scheme::theorem5);
}

PrecoderSet build_example1(const ChannelSet& channels) {
  PrecoderSet out = build_theorem4(channels, 2, 4);
  out.scheme = Scheme::example1;
  return out;
}

PrecoderSet build_example2(const ChannelSet& channels) {
  // Role swap 2 <-> 4 moves the extra stream onto user 4, matching the
  // published allocation (2, 2, 2, 3).
  std::vector<int> roles{0, 1, 4, 3, 2};
  return build_chained(channels, 2, 2, roles, Scheme::example2);
}

PrecoderSet build_zero_forcing(const ChannelSet& channels, int users) {
  const auto& cfg = channels.config();
  const int M = cfg.tx_antennas;
  const int N = cfg.rx_antennas;
  if (M > N)
    throw std::invalid_argument(
        "zero forcing builder expects M <= N; swap antennas at the bounds "
        "level for the other orientation");
  if (users < 1 || users > cfg.users)
    throw std::invalid_argument("invalid user count");
  const int ratio = N / M;
  if (users > ratio)
    throw std::invalid_argument("zero forcing needs K <= R = floor(N/M)");
  if (static_cast<long long>(users) * M > N)
    throw std::logic_error("ZF feasibility K*M <= N violated");

  PrecoderSet out;
  out.scheme = Scheme::zero_forcing;
  out.users = users;
  out.extension = 1;
  out.allocation.assign(users, M);
  CounterRng rng(cfg.seed);
  for (int i = 1; i <= users; ++i) {
    Matrix v;
    for (int salt = 0; salt <= kRedrawLimit; ++salt) {
      v = random_columns(rng, 0x78, i, M, M, salt, cfg.magnitude_lo,
                         cfg.magnitude_hi);
      if (full_column_rank(v)) break;
      if (salt == kRedrawLimit)
        throw NumericalError("random precoder stayed rank-deficient");
    }
    normalize_columns(v);
    out.precoders.push_back(std::move(v));
  }
  return out;
}

AlignmentReport verify_constant_alignment(const ChannelSet& channels,
                                          const PrecoderSet& p,
                                          double eps) {
  const auto& cfg = channels.config();
  const int E = p.extension;
  const long long space = static_cast<long long>(cfg.rx_antennas) * E;

  ExtendedChannel ext;
  if (E > 1) ext = extend_channel(channels, E, 0);
  auto channel = [&](int k, int j) -> Matrix {
    return E > 1 ? ext.at(k, j) : Matrix(channels.at(k, j, 0));
  };

  AlignmentReport rep;
  rep.scheme = scheme_name(p.scheme);
  rep.svd_eps = eps;
  rep.pass = true;
  double min_entry = std::numeric_limits<double>::infinity();
  for (const auto& v : p.precoders)
    if (v.size() > 0) min_entry = std::min(min_entry, v.cwiseAbs().minCoeff());
  rep.min_entry_magnitude = std::isfinite(min_entry) ? min_entry : 0.0;

  for (int k = 1; k <= p.users; ++k) {
    ReceiverCheck c;
    c.receiver = k;
    c.streams = p.allocation[k - 1];
    c.interference_cap = static_cast<int>(space - c.streams);

    Eigen::Index cols = 0;
    for (int j = 1; j <= p.users; ++j)
      if (j != k) cols += p.precoders[j - 1].cols();
    Matrix interference(space, cols);
    Eigen::Index at = 0;
    for (int j = 1; j <= p.users; ++j) {
      if (j == k) continue;
      const Matrix& v = p.precoders[j - 1];
      if (v.cols() == 0) continue;
      interference.middleCols(at, v.cols()) = channel(k, j) * v;
      at += v.cols();
    }
    c.interference_cols = static_cast<int>(cols);
    c.interference_rank = numeric_rank(interference, eps).rank;

    if (c.streams > 0) {
      Matrix desired = channel(k, k) * p.precoders[k - 1];
      c.desired_rank = numeric_rank(desired, eps).rank;
      Matrix joint(space, desired.cols() + cols);
      joint << desired, interference;
      c.joint_rank = numeric_rank(joint, eps).rank;
      c.separable = c.desired_rank == c.streams &&
                    c.joint_rank == c.interference_rank + c.streams;
    } else {
      c.desired_rank = 0;
      c.joint_rank = c.interference_rank;
      c.separable = true;  // nothing to decode
    }
    rep.pass = rep.pass && c.separable &&
               c.interference_rank <= c.interference_cap;
    rep.receivers.push_back(c);
  }
  return rep;
}

}  // namespace ia
