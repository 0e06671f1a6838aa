#include "ionlag/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ionlag/errors.hpp"

namespace ionlag {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;
}  // namespace

double laguerre_assoc(int n, int m, double x) {
  if (n < 0 || m < 0) throw DomainError("laguerre_assoc: n and m must be nonnegative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = m + 1.0 - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + m + 1.0 - x) * cur - (k + m) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur)) throw RangeError("laguerre_assoc: L_n^m(x) overflows; use the log-domain coupling");
  return cur;
}

SignedLog laguerre_assoc_log(int n, int m, double x) {
  if (n < 0 || m < 0) throw DomainError("laguerre_assoc_log: n and m must be nonnegative");
  kernels::LaguerreState st;
  st.m[0] = m;
  st.x[0] = x;
  // Skip to index n in blocks, keeping only the last value.
  constexpr std::size_t kBlock = 256;
  std::vector<double> mant(kBlock * kernels::kLanes), sc(kBlock * kernels::kLanes);
  std::size_t remaining = static_cast<std::size_t>(n) + 1;
  double v = 1.0, s = 0.0;
  while (remaining > 0) {
    const std::size_t c = std::min(remaining, kBlock);
    kernels::scalar::laguerre_advance(st, c, mant.data(), sc.data());
    v = mant[(c - 1) * kernels::kLanes];
    s = sc[(c - 1) * kernels::kLanes];
    remaining -= c;
  }
  if (v == 0.0) return {1, kNegInf};
  return {v < 0 ? -1 : 1, std::log(std::fabs(v)) + s * kLn2};
}

double CouplingValue::magnitude() const { return std::exp(log_mag); }

std::complex<double> CouplingValue::value() const {
  const double r = sign * magnitude();
  switch (phase & 3) {
    case 0:
      return {r, 0.0};
    case 1:
      return {0.0, r};
    case 2:
      return {-r, 0.0};
    default:
      return {0.0, -r};
  }
}

namespace {

CouplingValue assemble_coupling(int n, int m, double eta, double mantissa, double scale) {
  CouplingValue f;
  f.phase = m & 3;
  f.sign = mantissa < 0 ? -1 : 1;
  if (mantissa == 0.0 || (eta == 0.0 && m > 0)) {
    f.log_mag = kNegInf;
    return f;
  }
  const double eta_pow = m == 0 ? 0.0 : m * std::log(eta);
  const double fact = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(n + m + 1.0));
  f.log_mag = eta_pow + fact - 0.5 * eta * eta + std::log(std::fabs(mantissa)) + scale * kLn2;
  return f;
}

}  // namespace

CouplingValue coupling_f(int n, int m, double eta) {
  if (n < 0 || m < 0) throw DomainError("coupling_f: n and m must be nonnegative");
  if (!(eta >= 0.0)) throw DomainError("coupling_f: eta must be nonnegative");
  CouplingStream stream({m, eta});
  // Drop the first n values.
  if (n > 0) stream.next(static_cast<std::size_t>(n));
  return stream.next(1).front();
}

CouplingStream::CouplingStream(std::span<const Lane> lanes) : lanes_(lanes.begin(), lanes.end()) {
  if (lanes_.empty() || lanes_.size() > static_cast<std::size_t>(kernels::kLanes)) {
    throw std::invalid_argument("CouplingStream: between 1 and 4 lanes required");
  }
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    if (lanes_[l].m < 0 || !(lanes_[l].eta >= 0.0)) throw DomainError("CouplingStream: invalid (m, eta)");
    state_.m[l] = lanes_[l].m;
    state_.x[l] = lanes_[l].eta * lanes_[l].eta;
  }
}

void CouplingStream::next(std::size_t count, std::span<std::vector<CouplingValue>> out) {
  if (out.size() < lanes_.size()) throw std::invalid_argument("CouplingStream::next: not enough output lanes");
  mant_.resize(count * kernels::kLanes);
  scale_.resize(count * kernels::kLanes);
  kernels::laguerre_advance(state_, count, mant_.data(), scale_.data());
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    auto& dst = out[l];
    dst.reserve(dst.size() + count);
    for (std::size_t i = 0; i < count; ++i) {
      const int n = static_cast<int>(position_ + i);
      dst.push_back(assemble_coupling(n, lanes_[l].m, lanes_[l].eta, mant_[i * kernels::kLanes + l],
                                      scale_[i * kernels::kLanes + l]));
    }
  }
  position_ += count;
}

std::vector<CouplingValue> CouplingStream::next(std::size_t count) {
  std::vector<std::vector<CouplingValue>> out(lanes_.size());
  next(count, out);
  return std::move(out.front());
}

double lncosh(double x) {
  const double a = std::fabs(x);
  return a - kLn2 + std::log1p(std::exp(-2.0 * a));
}

double log_sum_exp(std::span<const double> terms) {
  double mx = kNegInf;
  for (double t : terms) {
    if (std::isnan(t) || t == std::numeric_limits<double>::infinity()) {
      throw RangeError("log_sum_exp: +inf or NaN term");
    }
    mx = std::max(mx, t);
  }
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

void LogSumExp::add(double t) {
  if (std::isnan(t) || t == std::numeric_limits<double>::infinity()) {
    throw RangeError("LogSumExp: +inf or NaN term");
  }
  if (t == kNegInf) return;
  if (t <= max_) {
    sum_ += std::exp(t - max_);
  } else {
    sum_ = sum_ * std::exp(max_ - t) + 1.0;
    max_ = t;
  }
}

double LogSumExp::value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

double sqrt_excess(double w, double u) {
  double out = 0.0;
  kernels::scalar::sqrt_excess(std::fabs(w), &u, &out, 1);
  return out;
}

double sqrt_shift(double wL, double u, double w0) { return (std::fabs(wL) - w0) + sqrt_excess(wL, u); }

double log1p_exp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double log1m_exp(double x) {
  if (!(x > 0)) throw DomainError("log1m_exp: argument must be positive");
  return x < kLn2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

double log_expm1(double x) { return x + log1m_exp(x); }

}  // namespace ionlag
