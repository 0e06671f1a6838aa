#pragma once

// Exact block eigendecomposition of the sideband Hamiltonians at the quench
// instant, and dense truncated-Fock builders used as a brute-force oracle.
//
// Energies are in units of hbar*nu. Dense matrices use the ordered product
// basis |0,g>, |0,e>, |1,g>, |1,e>, ..., |N,g>, |N,e>.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "ionlag/params.hpp"

namespace ionlag {

enum class Level { g, e };

struct BasisKet {
  int n = 0;
  Level level = Level::g;

  int dense_index() const { return 2 * n + (level == Level::e ? 1 : 0); }
  friend bool operator==(const BasisKet&, const BasisKet&) = default;
};

struct EigenPair {
  double value = 0.0;
  std::vector<BasisKet> kets;
  std::vector<std::complex<double>> amplitudes;

  /// Embeds the vector into the dense basis of dimension 2(N+1).
  Eigen::VectorXcd dense(int n_trunc) const;
};

/// One invariant 2x2 block {a, b} of a sideband Hamiltonian:
/// H = [[d1, c], [conj(c), d2]] with a, b the labeled kets.
struct SidebandBlock {
  BasisKet a, b;
  double d1 = 0.0, d2 = 0.0;
  std::complex<double> c;
};

SidebandBlock sideband_block(int n, const ReducedParams& rp);

/// (mu, gamma): mu = n + m/2 - S/2, gamma = n + m/2 + S/2 with
/// S = sqrt(wL^2 + Omega^2 |f_n^m|^2), all over nu.
std::array<double, 2> sideband_eigenvalues(int n, const ReducedParams& rp);

/// Decoupled one-dimensional blocks for n < m (empty for the carrier).
std::vector<double> edge_eigenvalues(const ReducedParams& rp);
std::vector<EigenPair> edge_eigenpairs(const ReducedParams& rp);

/// Normalized, orthogonal eigenvectors of block n, ordered {mu, gamma}. When
/// f_n^m vanishes the decoupled basis kets are returned.
std::array<EigenPair, 2> sideband_eigenvectors(int n, const ReducedParams& rp);

struct SpectrumTable {
  Branch branch = Branch::Carrier;
  int m = 0;
  int n_trunc = 0;
  std::vector<double> edge;
  std::vector<std::array<double, 2>> pairs;  // (mu, gamma) for n = 0..n_trunc
};

SpectrumTable spectrum_table(const ReducedParams& rp, int n_trunc);

/// <n_row| exp(i eta (a + a^dag)) |n_col>. The matrix is complex symmetric.
std::complex<double> displacement_element(int n_row, int n_col, double eta);
Eigen::MatrixXcd displacement_matrix(int n_trunc, double eta);

struct DenseOperators {
  Eigen::MatrixXcd h_initial;
  Eigen::MatrixXcd h_final_full;
  Eigen::MatrixXcd h_final_sideband;
  Eigen::MatrixXcd rho_initial;
  int n_trunc = 0;
  /// Set when exp(-beta hbar nu N) >= 1e-12 (thermal weight leaks past the cut).
  bool thermal_tail_warning = false;
};

/// Requires n_trunc >= m + 2. Throws ParameterError on invariant failures.
DenseOperators dense_hamiltonians(const ReducedParams& rp, int n_trunc);

/// Eigenvalues (ascending) of a Hermitian matrix.
Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXcd& h);

/// ln Tr exp(-b_nu H) for H in hbar*nu units.
double dense_log_partition(const Eigen::MatrixXcd& h, double b_nu);

/// Energies of uncoupled states at the top of a truncated sideband matrix:
/// JC |n,e>, AJC |n,g> for N - m < n <= N.
std::vector<double> truncation_boundary_energies(const ReducedParams& rp, int n_trunc);

}  // namespace ionlag
