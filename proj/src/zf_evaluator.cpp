// SPDX-License-Identifier: Apache-2.0
#include "ia/zf_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace ia {

namespace {

constexpr double kLeakageLimit = 1e-9;

LinkSet assemble_links(int users, int extension,
                       const std::vector<int>& allocation,
                       const std::vector<const Matrix*>& precoders,
                       const std::function<Matrix(int, int)>& channel,
                       long long space) {
  LinkSet links;
  links.users = users;
  links.extension = extension;
  links.allocation = allocation;
  for (int k = 1; k <= users; ++k) {
    Eigen::Index cols = 0;
    for (int j = 1; j <= users; ++j)
      if (j != k) cols += precoders[j - 1]->cols();
    Matrix interference(space, cols);
    Eigen::Index at = 0;
    for (int j = 1; j <= users; ++j) {
      if (j == k) continue;
      const Matrix& v = *precoders[j - 1];
      if (v.cols() == 0) continue;
      interference.middleCols(at, v.cols()) = channel(k, j) * v;
      at += v.cols();
    }
    links.desired.push_back(channel(k, k) * *precoders[k - 1]);
    links.interference.push_back(std::move(interference));
  }
  return links;
}

}  // namespace

LinkSet make_links(const ChannelSet& channels, const PrecoderSet& p) {
  const auto& cfg = channels.config();
  const int E = p.extension;
  ExtendedChannel ext;
  if (E > 1) ext = extend_channel(channels, E, 0);
  std::vector<const Matrix*> pre;
  for (const auto& v : p.precoders) pre.push_back(&v);
  auto channel = [&](int k, int j) -> Matrix {
    return E > 1 ? ext.at(k, j) : Matrix(channels.at(k, j, 0));
  };
  return assemble_links(p.users, E, p.allocation, pre, channel,
                        static_cast<long long>(cfg.rx_antennas) * E);
}

LinkSet make_links(const ExtendedChannel& ext, const SimoPrecoders& p) {
  if (ext.mu != p.mu || ext.users != p.users)
    throw std::invalid_argument("extension does not match the precoders");
  std::vector<int> allocation;
  std::vector<const Matrix*> pre;
  for (int i = 1; i <= p.users; ++i) {
    allocation.push_back(p.streams(i));
    pre.push_back(i <= p.ratio + 1 ? &p.v1 : &p.v2);
  }
  auto channel = [&](int k, int j) -> Matrix { return ext.at(k, j); };
  return assemble_links(p.users, static_cast<int>(p.mu), allocation, pre,
                        channel,
                        static_cast<long long>(p.ratio) * p.mu);
}

FilterBank zf_filters(const LinkSet& links, double eps) {
  FilterBank bank;
  for (int i = 0; i < links.users; ++i) {
    const Matrix& desired = links.desired[i];
    const Matrix& interference = links.interference[i];
    const int d = links.allocation[i];
    const Eigen::Index space = desired.rows();

    if (d == 0) {
      bank.filters.emplace_back(0, space);
      continue;
    }

    Matrix projected = desired;
    Matrix basis;
    if (interference.cols() > 0) {
      basis = orthonormal_range(interference, eps);
      projected -= basis * (basis.adjoint() * desired);
    }
    RankResult rr = numeric_rank(projected, eps);
    if (rr.rank < d) {
      std::ostringstream os;
      os << "separability failure at receiver " << (i + 1)
         << ": desired signal spans only " << rr.rank << " of " << d
         << " dimensions clear of the interference";
      throw NumericalError(os.str());
    }

    Matrix pinv = pseudo_inverse(projected);  // d x space
    Matrix filter = pinv;
    if (basis.cols() > 0) filter -= (pinv * basis) * basis.adjoint();

    if (interference.cols() > 0) {
      Matrix leak = filter * interference;
      for (Eigen::Index r = 0; r < leak.rows(); ++r)
        for (Eigen::Index c = 0; c < leak.cols(); ++c) {
          double denom =
              filter.row(r).norm() * interference.col(c).norm();
          if (denom > 0)
            bank.max_leakage =
                std::max(bank.max_leakage, std::abs(leak(r, c)) / denom);
        }
    }
    bank.filters.push_back(std::move(filter));
  }
  if (bank.max_leakage > kLeakageLimit) {
    std::ostringstream os;
    os << "interference leakage " << bank.max_leakage << " exceeds "
       << kLeakageLimit;
    throw NumericalError(os.str());
  }
  return bank;
}

double sum_rate(const LinkSet& links, const FilterBank& filters,
                double snr_db) {
  const double rho = std::pow(10.0, snr_db / 10.0);
  double total = 0.0;
  for (int i = 0; i < links.users; ++i) {
    const int d = links.allocation[i];
    if (d == 0) continue;
    const double per_stream = rho / (static_cast<double>(links.users) * d);
    const Matrix& f = filters.filters[i];
    for (Eigen::Index m = 0; m < f.rows(); ++m) {
      double noise = f.row(m).squaredNorm();  // unit-variance noise amplified
      total += std::log2(1.0 + per_stream / noise);
    }
  }
  return total / links.extension;
}

std::vector<double> default_snr_grid() { return {30, 40, 50, 60, 70}; }

SweepResult dof_slope(const LinkSet& links, const FilterBank& filters,
                      const std::vector<double>& snr_grid_db,
                      const Rational& predicted_dof, const std::string& scheme,
                      std::uint64_t seed) {
  if (snr_grid_db.size() < 4)
    throw std::invalid_argument("SNR grid needs at least 4 points");
  if (!std::is_sorted(snr_grid_db.begin(), snr_grid_db.end()))
    throw std::invalid_argument("SNR grid must be ascending");
  if (snr_grid_db.back() < 50.0)
    throw std::invalid_argument("top SNR point must be at least 50 dB");

  SweepResult out;
  out.snr_grid_db = snr_grid_db;
  out.predicted_dof = predicted_dof;
  out.scheme = scheme;
  out.seed = seed;
  for (double snr : snr_grid_db)
    out.sum_rate_bits.push_back(sum_rate(links, filters, snr));

  // Least squares over the top half; log2(rho) = snr_db * log2(10) / 10.
  const std::size_t begin = snr_grid_db.size() / 2;
  const std::size_t count = snr_grid_db.size() - begin;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t p = begin; p < snr_grid_db.size(); ++p) {
    double x = snr_grid_db[p] * std::log2(10.0) / 10.0;
    double y = out.sum_rate_bits[p];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope_estimate =
      (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return out;
}

}  // namespace ia
