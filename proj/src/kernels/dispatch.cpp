#include <atomic>
#include <stdexcept>
#include <string>

#include "ionlag/kernels.hpp"

namespace ionlag::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "?";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect() {
  if (available(Isa::Avx2)) return Isa::Avx2;
  if (available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

namespace {

struct Table {
  LaguerreAdvanceFn laguerre;
  SqrtExcessFn excess;
};

Table table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2:
      return {&avx2::laguerre_advance, &avx2::sqrt_excess};
#endif
#if defined(__aarch64__)
    case Isa::Neon:
      return {&neon::laguerre_advance, &neon::sqrt_excess};
#endif
    default:
      return {&scalar::laguerre_advance, &scalar::sqrt_excess};
  }
}

std::atomic<Isa> g_active{detect()};
std::atomic<LaguerreAdvanceFn> g_laguerre{table_for(detect()).laguerre};
std::atomic<SqrtExcessFn> g_excess{table_for(detect()).excess};

}  // namespace

Isa active() { return g_active.load(std::memory_order_relaxed); }

void set_active(Isa isa) {
  if (!available(isa)) throw std::runtime_error("ISA " + std::string(to_string(isa)) + " not available on this CPU");
  const Table t = table_for(isa);
  g_laguerre.store(t.laguerre, std::memory_order_relaxed);
  g_excess.store(t.excess, std::memory_order_relaxed);
  g_active.store(isa, std::memory_order_relaxed);
}

void laguerre_advance(LaguerreState& s, std::size_t count, double* mantissa, double* scale) {
  g_laguerre.load(std::memory_order_relaxed)(s, count, mantissa, scale);
}

void sqrt_excess(double w, std::span<const double> u, std::span<double> out) {
  if (out.size() < u.size()) throw std::invalid_argument("sqrt_excess: output span too small");
  g_excess.load(std::memory_order_relaxed)(w, u.data(), out.data(), u.size());
}

}  // namespace ionlag::kernels
