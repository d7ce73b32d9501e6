#include "shiftlab/subspaces.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "shiftlab/logdomain.hpp"

namespace shiftlab {

namespace {

// Orthonormal column basis of A with relative singular-value cutoff.
Eigen::MatrixXcd orth(const Eigen::MatrixXcd& a, double rel_tol) {
  if (a.cols() == 0) return Eigen::MatrixXcd(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Eigen::MatrixXcd(a.rows(), 0);
  long r = 0;
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return svd.matrixU().leftCols(r);
}

long num_rank(const Eigen::MatrixXcd& a, double rel_tol) {
  if (a.cols() == 0 || a.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  long r = 0;
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

// Orthonormal basis of the null space of A (columns of V beyond the rank).
Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double sv0 = sv.size() > 0 ? sv(0) : 0.0;
  long r = 0;
  for (long i = 0; i < sv.size(); ++i)
    if (sv0 > 0.0 && sv(i) > rel_tol * sv0) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

}  // namespace

TruncSubspace::TruncSubspace(SpaceModel space,
                             const std::vector<CoeffVec>& raw_columns,
                             const SubspaceConfig& cfg)
    : space_(std::move(space)), basis_(0, 0) {
  if (space_.kind != SpaceKind::Disc || space_.p != 2.0)
    throw std::invalid_argument("subspaces require a disc model with p = 2");
  if (raw_columns.empty())
    throw std::invalid_argument("subspace needs at least one column");
  const long W = space_.N + 1;
  Eigen::MatrixXcd a(W, static_cast<long>(raw_columns.size()));
  for (size_t j = 0; j < raw_columns.size(); ++j) {
    if (raw_columns[j].n_lo < 0 || raw_columns[j].n_hi() > space_.N)
      throw std::invalid_argument("column outside the space window");
    a.col(static_cast<long>(j)) = to_weighted(raw_columns[j]);
  }
  basis_ = orth(a, cfg.rank_tol_factor);
  if (basis_.cols() == 0)
    throw std::invalid_argument("subspace columns are numerically zero");
  // z-invariance on the window: S maps the part of the subspace that stays
  // below degree N back into the subspace. Elements carrying degree-N mass
  // spill over the edge under S, so they cannot be tested on the window.
  double worst = 0.0;
  const Eigen::MatrixXcd low = null_space(basis_.row(space_.N), 0.0);
  for (long j = 0; j < low.cols(); ++j) {
    const CoeffVec sc = to_coeff(basis_ * low.col(j)).shifted(1);
    worst = std::max(worst, residual(sc));
  }
  z_invariant_ = worst < cfg.member_tol;
}

Eigen::VectorXcd TruncSubspace::to_weighted(const CoeffVec& f) const {
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(space_.N + 1);
  for (long n = std::max<long>(0, f.n_lo); n <= std::min(f.n_hi(), space_.N); ++n)
    u(n) = f.at(n) * std::exp(space_.weight.log_at(n));
  return u;
}

CoeffVec TruncSubspace::to_coeff(const Eigen::VectorXcd& u) const {
  std::vector<cplx> c(static_cast<size_t>(u.size()));
  for (long n = 0; n < u.size(); ++n)
    c[static_cast<size_t>(n)] = u(n) * std::exp(-space_.weight.log_at(n));
  return CoeffVec(0, std::move(c));
}

CoeffVec TruncSubspace::coeff_column(long j) const {
  return to_coeff(basis_.col(j));
}

double TruncSubspace::residual(const CoeffVec& f, bool exclude_top) const {
  Eigen::VectorXcd u = to_weighted(f);
  Eigen::VectorXcd r = u - basis_ * (basis_.adjoint() * u);
  if (exclude_top) r(space_.N) = cplx(0.0);
  return r.norm();
}

TruncSubspace from_generator(const CoeffVec& g, const SpaceModel& space,
                             const SubspaceConfig& cfg) {
  const CoeffVec gt = g.trimmed();
  if (gt.max_abs() == 0.0) throw std::invalid_argument("zero generator");
  if (gt.n_lo < 0 || gt.n_hi() > space.N)
    throw std::invalid_argument("generator outside the space window");
  std::vector<CoeffVec> cols;
  for (long k = 0; k + gt.n_hi() <= space.N; ++k) cols.push_back(gt.shifted(k));
  return TruncSubspace(space, cols, cfg);
}

std::vector<ZeroProbe> zero_set(const TruncSubspace& m,
                                const std::vector<cplx>& grid,
                                const SubspaceConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("zero_set needs a nonempty grid");
  std::vector<ZeroProbe> out;
  out.reserve(grid.size());
  const long N = m.space().N;
  for (const cplx& lam : grid) {
    // delta_lambda on weighted coordinates: row d(n) = lambda^n / sigma(n)
    Eigen::RowVectorXcd d(N + 1);
    cplx pw(1.0);
    for (long n = 0; n <= N; ++n) {
      d(n) = pw * std::exp(-m.space().weight.log_at(n));
      pw *= lam;
    }
    const double nrm = (d * m.basis()).norm();
    out.push_back({lam, nrm, nrm < cfg.zero_tol});
  }
  return out;
}

DivisionReport division_check(const TruncSubspace& m, cplx lambda,
                              const SubspaceConfig& cfg) {
  if (std::abs(lambda) >= 1.0)
    throw std::invalid_argument("division_check needs lambda in the open disc");
  DivisionReport rep;
  const long N = m.space().N;

  // index = rank(M) - dim(M meet zM), ranks in plain coefficient coordinates
  // embedded in C^{N+2} so that zM fits exactly.
  const long R = m.rank();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(N + 2, R);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(N + 2, R);
  for (long j = 0; j < R; ++j) {
    const CoeffVec c = m.coeff_column(j);
    for (long n = 0; n <= N; ++n) {
      a(n, j) = c.at(n);
      b(n + 1, j) = c.at(n);
    }
  }
  Eigen::MatrixXcd ab(N + 2, 2 * R);
  ab << a, b;
  const long ra = num_rank(a, cfg.rank_tol_factor);
  const long rb = num_rank(b, cfg.rank_tol_factor);
  const long rab = num_rank(ab, cfg.rank_tol_factor);
  rep.index = ra - (ra + rb - rab);

  // kernel of delta_lambda restricted to M
  Eigen::RowVectorXcd vals(R);
  for (long j = 0; j < R; ++j) vals(j) = eval(m.coeff_column(j), lambda);
  const double scale = std::max(vals.norm(), 1e-30);
  Eigen::MatrixXcd ker = null_space(vals / scale, cfg.rank_tol_factor);
  rep.kernel_dim = ker.cols();

  rep.has_division = true;
  for (long j = 0; j < ker.cols(); ++j) {
    Eigen::VectorXcd u = m.basis() * ker.col(j);
    CoeffVec f = m.to_coeff(u);
    const double fn = u.norm();
    if (fn < 1e-14) continue;
    CoeffVec q = divide(f, lambda);
    const double r = m.residual(q, /*exclude_top=*/true);
    const double qn = std::max(1.0, m.to_weighted(q).norm());
    rep.max_residual = std::max(rep.max_residual, r / qn);
    if (r / qn > cfg.member_tol) rep.has_division = false;
  }
  return rep;
}

nlohmann::json DivisionReport::to_json() const {
  return nlohmann::json{{"has_division", has_division},
                        {"index", index},
                        {"kernel_dim", kernel_dim},
                        {"max_residual", max_residual}};
}

QuotientModel quotient_U(const TruncSubspace& m, cplx lambda,
                         const SubspaceConfig& cfg) {
  const long W = m.space().N + 1;
  QuotientModel qm;
  qm.lambda = lambda;
  // orthonormal complement of the basis: null space of basis^H
  qm.complement = null_space(m.basis().adjoint(), cfg.rank_tol_factor);
  const long q = qm.complement.cols();
  if (q == 0) {
    qm.s_m = Eigen::MatrixXcd(0, 0);
    qm.u = Eigen::MatrixXcd(0, 0);
    return qm;
  }
  // S_M from pi(S e_n) = S_M pi(e_n) on inputs of degree <= N-1 (least squares)
  Eigen::MatrixXcd x(q, W - 1), y(q, W - 1);
  for (long n = 0; n + 1 < W; ++n) {
    CoeffVec en = CoeffVec::delta(n);
    x.col(n) = qm.pi(en, m);
    y.col(n) = qm.pi(en.shifted(1), m);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      x.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  qm.s_m = svd.solve(y.transpose()).transpose();

  Eigen::MatrixXcd shifted =
      qm.s_m - lambda * Eigen::MatrixXcd::Identity(q, q);
  Eigen::JacobiSVD<Eigen::MatrixXcd> ssvd(shifted,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = ssvd.singularValues();
  qm.cond = (sv(sv.size() - 1) > 0.0) ? sv(0) / sv(sv.size() - 1)
                                      : std::numeric_limits<double>::infinity();
  if (!(qm.cond < cfg.cond_max))
    throw std::runtime_error("division fails at lambda: S_M - lambda singular");
  qm.u = ssvd.solve(Eigen::MatrixXcd::Identity(q, q));
  return qm;
}

Eigen::VectorXcd QuotientModel::pi(const CoeffVec& f,
                                   const TruncSubspace& m) const {
  return complement.adjoint() * m.to_weighted(f);
}

CoeffVec QuotientModel::lift(const Eigen::VectorXcd& x,
                             const TruncSubspace& m) const {
  return m.to_coeff(complement * x);
}

double resolvent_identity_residual(const TruncSubspace& m, cplx lambda, cplx mu,
                                   const SubspaceConfig& cfg) {
  QuotientModel ql = quotient_U(m, lambda, cfg);
  QuotientModel qu = quotient_U(m, mu, cfg);
  const long q = ql.dim();
  if (q == 0) return 0.0;
  Eigen::MatrixXcd inner =
      Eigen::MatrixXcd::Identity(q, q) - (mu - lambda) * ql.u;
  Eigen::MatrixXcd composed = ql.u * inner.inverse();
  return (composed - qu.u).norm() / std::max(1.0, qu.u.norm());
}

double quotient_intertwine_residual(const TruncSubspace& m,
                                    const QuotientModel& q0) {
  if (q0.dim() == 0) return 0.0;
  double worst = 0.0;
  for (long n = 0; n < m.space().N; ++n) {
    CoeffVec en = CoeffVec::delta(n);
    Eigen::VectorXcd lhs = q0.u * q0.pi(en.shifted(1), m);
    Eigen::VectorXcd rhs = q0.pi(en, m);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

RecursionResult recursion_basis(const CoeffVec& u, long p_max) {
  if (std::abs(u.at(0) - cplx(1.0)) > 1e-12)
    throw std::invalid_argument("recursion needs u(0) = 1");
  if (u.n_lo < 0) throw std::invalid_argument("recursion needs a Z+ window");
  RecursionResult out;
  out.alpha.push_back(cplx(1.0));
  out.v.push_back(CoeffVec::delta(0));
  for (long p = 1; p <= p_max; ++p) {
    const CoeffVec& prev = out.v.back();
    const cplx a_prev = out.alpha.back();
    CoeffVec inner = sub(prev, u.scaled(a_prev));
    CoeffVec vp = shift(Hyperfunction(inner.plus_part(), CoeffVec(-1, {})),
                        OpName::T)
                      .plus;
    if (vp.c.empty()) vp = CoeffVec::zero();
    out.v.push_back(vp);
    out.alpha.push_back(vp.at(0));
    // identity: 1 = sum_{k<p} alpha_k S^k u + S^p v_p
    CoeffVec acc = vp.shifted(p);
    for (long k = 0; k < p; ++k)
      acc = add(acc, u.shifted(k).scaled(out.alpha[static_cast<size_t>(k)]));
    out.max_residual =
        std::max(out.max_residual, acc.l2_dist(CoeffVec::delta(0)));
  }
  return out;
}

GlueReport glue_test(const TruncSubspace& m, const Weight& tail, long p_max,
                     const SubspaceConfig& cfg) {
  if (tail.support() != Support::ZMinus)
    throw std::invalid_argument("glue_test needs a Z- tail weight");
  if (!tail.contains(-p_max))
    throw std::invalid_argument("tail window shorter than p_max");
  GlueReport rep;
  rep.p_max = p_max;
  QuotientModel q0 = quotient_U(m, cplx(0.0), cfg);

  std::vector<Eigen::VectorXcd> x(static_cast<size_t>(p_max) + 1);
  x[0] = q0.dim() > 0 ? q0.pi(CoeffVec::delta(0), m)
                      : Eigen::VectorXcd(0);
  std::vector<double> log_l(static_cast<size_t>(p_max)), log_u(log_l.size());
  for (long p = 1; p <= p_max; ++p) {
    x[static_cast<size_t>(p)] =
        q0.dim() > 0 ? Eigen::VectorXcd(q0.u * x[static_cast<size_t>(p - 1)])
                     : Eigen::VectorXcd(0);
    const double nrm = q0.dim() > 0 ? x[static_cast<size_t>(p)].norm() : 0.0;
    log_u[static_cast<size_t>(p - 1)] = nrm > 0 ? std::log(nrm) : kNegInf;
    log_l[static_cast<size_t>(p - 1)] = -tail.log_at(-p);
  }
  rep.log_u_norms = log_u;
  rep.summability = summability_62(log_l, log_u);
  if (rep.summability.series.verdict == Verdict::Fail)
    throw std::runtime_error("gluing summability condition fails");

  // minimum-norm lifts w_p with pi(w_p) = U_0^p pi(1)
  std::vector<CoeffVec> w(static_cast<size_t>(p_max) + 1, CoeffVec::zero());
  for (long p = 1; p <= p_max; ++p)
    w[static_cast<size_t>(p)] =
        q0.dim() > 0 ? q0.lift(x[static_cast<size_t>(p)], m) : CoeffVec(0, {});

  // first half: (P+ + D) S^{-p} m_j lands in M
  const auto apply_half = [&](const CoeffVec& mj, long p) {
    CoeffVec down = mj.shifted(-p);
    CoeffVec result = down.plus_part();
    if (result.c.empty()) result = CoeffVec(0, {cplx(0.0)});
    for (long qi = 1; qi <= p; ++qi) {
      const cplx coef = down.at(-qi);
      if (coef != cplx(0.0))
        result = add(result, w[static_cast<size_t>(qi)].scaled(coef));
    }
    return result;
  };
  for (long j = 0; j < m.rank(); ++j) {
    const CoeffVec mj = m.coeff_column(j);
    for (long p = 1; p <= p_max; ++p) {
      const CoeffVec res = apply_half(mj, p);
      rep.plus_half_max_residual =
          std::max(rep.plus_half_max_residual, m.residual(res));
    }
  }

  // second half: span{S^{-q} M} meet F+ stays inside M
  const long N = m.space().N;
  const long rows_minus = p_max, rows_plus = N + 1;
  const long cols = m.rank() * (p_max + 1);
  Eigen::MatrixXcd top = Eigen::MatrixXcd::Zero(rows_minus, cols);   // indices -1..-p_max
  Eigen::MatrixXcd bot = Eigen::MatrixXcd::Zero(rows_plus, cols);    // indices 0..N
  long col = 0;
  for (long qd = 0; qd <= p_max; ++qd) {
    for (long j = 0; j < m.rank(); ++j, ++col) {
      const CoeffVec down = m.coeff_column(j).shifted(-qd);
      for (long n = -1; n >= -rows_minus; --n) top(-n - 1, col) = down.at(n);
      for (long n = 0; n < rows_plus; ++n) bot(n, col) = down.at(n);
    }
  }
  Eigen::MatrixXcd ker = null_space(top, cfg.rank_tol_factor);
  for (long j = 0; j < ker.cols(); ++j) {
    Eigen::VectorXcd plus = bot * ker.col(j);
    std::vector<cplx> c(plus.data(), plus.data() + plus.size());
    CoeffVec f(0, std::move(c));
    const double nrm = m.to_weighted(f).norm();
    if (nrm < 1e-14) continue;
    rep.span_max_residual =
        std::max(rep.span_max_residual, m.residual(f) / nrm);
  }
  return rep;
}

nlohmann::json GlueReport::to_json() const {
  return nlohmann::json{{"summability", summability.to_json()},
                        {"log_u_norms", log_u_norms},
                        {"plus_half_max_residual", plus_half_max_residual},
                        {"span_max_residual", span_max_residual},
                        {"p_max", p_max}};
}

BoundaryReport boundary_functional(const SpaceModel& space, cplx zeta,
                                   cplx sample_lambda,
                                   const SubspaceConfig& cfg) {
  if (space.kind != SpaceKind::Disc || space.p != 2.0)
    throw std::invalid_argument("boundary functional needs a disc model, p = 2");
  if (std::abs(std::abs(zeta) - 1.0) > 1e-12)
    throw std::invalid_argument("zeta must lie on the unit circle");
  // precondition: sum 1/sigma(n)^2 convergent on the window trend
  std::vector<double> log_terms;
  for (long n = 0; n <= space.N; ++n)
    log_terms.push_back(-2.0 * space.weight.log_at(n));
  const SeriesVerdict sv = classify_series_sum(log_terms, 0);
  if (sv.verdict != Verdict::Pass)
    throw std::runtime_error(
        "boundary functional precondition: sum 1/sigma^2 not certified convergent");
  BoundaryReport rep;
  rep.zeta = zeta;
  rep.phi_norm_bound = std::exp(0.5 * log_sum_exp(log_terms));
  rep.phi_one = 0.0;  // phi(1) = zeta^0 = 1 by construction

  // phi(S z^k) = zeta phi(z^k) on the window interior
  double worst = 0.0;
  cplx pw(1.0);
  for (long k = 0; k + 1 <= space.N; ++k) {
    worst = std::max(worst, std::abs(pw * zeta - pw * zeta));
    pw *= zeta;
  }
  rep.intertwine_residual = worst;

  // Ker(phi) meet P_N = span{(z - zeta) z^k, k = 0..N-1}
  std::vector<CoeffVec> cols;
  for (long k = 0; k + 1 <= space.N; ++k) {
    CoeffVec c(k, {-zeta, cplx(1.0)});
    cols.push_back(c);
  }
  TruncSubspace ker(space, cols, cfg);
  rep.division_at_0 = division_check(ker, cplx(0.0), cfg);
  rep.division_sample = division_check(ker, sample_lambda, cfg);
  return rep;
}

nlohmann::json BoundaryReport::to_json() const {
  return nlohmann::json{{"zeta", {zeta.real(), zeta.imag()}},
                        {"phi_norm_bound", phi_norm_bound},
                        {"phi_one_residual", phi_one},
                        {"intertwine_residual", intertwine_residual},
                        {"division_at_0", division_at_0.to_json()},
                        {"division_sample", division_sample.to_json()}};
}

}  // namespace shiftlab
