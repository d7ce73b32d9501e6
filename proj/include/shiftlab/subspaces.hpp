#ifndef SHIFTLAB_SUBSPACES_HPP
#define SHIFTLAB_SUBSPACES_HPP

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "shiftlab/growth.hpp"
#include "shiftlab/operators.hpp"

namespace shiftlab {

struct SubspaceConfig {
  double rank_tol_factor = 1e-10;  // singular-value cutoff, relative to sv_max
  double member_tol = 1e-9;        // projection-residual membership threshold
  double zero_tol = 1e-7;          // |f(lambda)| level declaring a common zero
  double cond_max = 1e12;          // condition cap for (S_M - lambda I)
};

/// A finite-rank subspace of a disc model (p = 2), stored as an orthonormal
/// basis in sigma-weighted coordinates u(n) = c(n) sigma(n).
class TruncSubspace {
 public:
  TruncSubspace(SpaceModel space, const std::vector<CoeffVec>& raw_columns,
                const SubspaceConfig& cfg = {});

  const SpaceModel& space() const { return space_; }
  long rank() const { return basis_.cols(); }
  long dim_ambient() const { return basis_.rows(); }
  const Eigen::MatrixXcd& basis() const { return basis_; }  // weighted coords
  bool z_invariant() const { return z_invariant_; }

  /// j-th orthonormal basis element as a coefficient window on [0, N].
  CoeffVec coeff_column(long j) const;

  Eigen::VectorXcd to_weighted(const CoeffVec& f) const;
  CoeffVec to_coeff(const Eigen::VectorXcd& u) const;

  /// Weighted-norm distance from f to the subspace; exclude_top drops the
  /// degree-N row (truncation edge) from the residual.
  double residual(const CoeffVec& f, bool exclude_top = false) const;

 private:
  SpaceModel space_;
  Eigen::MatrixXcd basis_;
  bool z_invariant_ = false;
};

/// span{g, zg, ..., z^{N-deg g} g} inside the model.
TruncSubspace from_generator(const CoeffVec& g, const SpaceModel& space,
                             const SubspaceConfig& cfg = {});

struct ZeroProbe {
  cplx lambda;
  double functional_norm;  // norm of delta_lambda restricted to M
  bool flagged;            // below zero_tol: common zero candidate
};
std::vector<ZeroProbe> zero_set(const TruncSubspace& m,
                                const std::vector<cplx>& grid,
                                const SubspaceConfig& cfg = {});

struct DivisionReport {
  bool has_division = false;
  long index = 0;            // rank(M) - rank(M meet zM)
  long kernel_dim = 0;       // dim of {f in M : f(lambda) = 0}
  double max_residual = 0.0; // worst membership residual among quotients
  nlohmann::json to_json() const;
};
DivisionReport division_check(const TruncSubspace& m, cplx lambda,
                              const SubspaceConfig& cfg = {});

/// Quotient E/M in orthonormal complement coordinates, with S_M and
/// U_lambda = (S_M - lambda I)^{-1}.
struct QuotientModel {
  Eigen::MatrixXcd complement;  // (N+1) x q, weighted coords
  Eigen::MatrixXcd s_m;         // q x q
  Eigen::MatrixXcd u;           // (S_M - lambda)^{-1}
  cplx lambda;
  double cond = 0.0;

  long dim() const { return s_m.rows(); }
  Eigen::VectorXcd pi(const CoeffVec& f, const TruncSubspace& m) const;
  /// Minimum-norm lift: the unique preimage orthogonal to M.
  CoeffVec lift(const Eigen::VectorXcd& x, const TruncSubspace& m) const;
};
QuotientModel quotient_U(const TruncSubspace& m, cplx lambda,
                         const SubspaceConfig& cfg = {});

/// Residual of the resolvent identity U_mu = U_lambda (I - (mu-lambda) U_lambda)^{-1}
/// against an independently built U_mu.
double resolvent_identity_residual(const TruncSubspace& m, cplx lambda, cplx mu,
                                   const SubspaceConfig& cfg = {});

/// Residual of U_0 pi S = pi on coordinate inputs of degree < N.
double quotient_intertwine_residual(const TruncSubspace& m,
                                    const QuotientModel& q0);

struct RecursionResult {
  std::vector<cplx> alpha;   // alpha_0 = 1
  std::vector<CoeffVec> v;   // v[p], v[0] = 1
  double max_residual = 0.0; // worst coefficient residual of the identity
};
/// alpha_p, v_p with 1 = sum_{k<p} alpha_k S^k u + S^p v_p, u(0) = 1.
RecursionResult recursion_basis(const CoeffVec& u, long p_max);

struct GlueReport {
  SummabilityReport summability;
  std::vector<double> log_u_norms;   // log ||U_0^p pi(1)||
  double plus_half_max_residual = 0.0;  // (P+ + D) S^{-p} m in M
  double span_max_residual = 0.0;       // span{S^{-p}M} meet F+ inside M
  long p_max = 0;
  nlohmann::json to_json() const;
};
/// The gluing construction: minimum-norm lifts w_p of U_0^p pi(1), the map
/// D f = sum f^(-p) w_p, and the two halves of the span identity. Throws if
/// the summability precondition fails.
GlueReport glue_test(const TruncSubspace& m, const Weight& tail, long p_max,
                     const SubspaceConfig& cfg = {});

struct BoundaryReport {
  cplx zeta;
  double phi_norm_bound = 0.0;     // (sum 1/sigma(n)^2)^{1/2} over the window
  double phi_one = 0.0;            // |phi(1) - 1|
  double intertwine_residual = 0.0;  // phi(S f) - zeta phi(f) on coordinates
  DivisionReport division_at_0;
  DivisionReport division_sample;
  nlohmann::json to_json() const;
};
/// Boundary evaluation phi(f) = sum f^(n) zeta^n on a model with summable
/// 1/sigma^2; Ker(phi) built as span{(z - zeta) z^k} and division-checked.
BoundaryReport boundary_functional(const SpaceModel& space, cplx zeta,
                                   cplx sample_lambda = cplx(0.4, 0.0),
                                   const SubspaceConfig& cfg = {});

}  // namespace shiftlab

#endif
