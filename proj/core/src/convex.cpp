#include "socnav/convex.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace socnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalReg = 1e-9;
constexpr double kDualReg = 1e-9;
constexpr double kStepFraction = 0.99;
constexpr double kDualDivergence = 1e10;

using Triplet = Eigen::Triplet<double>;

bool is_psd(const SparseMatrix& M, double shift) {
  if (M.rows() == 0) return true;
  SparseMatrix shifted = M;
  for (int i = 0; i < M.rows(); ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() >= 0.0).all();
}

double asymmetry(const SparseMatrix& M) {
  const SparseMatrix T = M.transpose();
  const SparseMatrix diff = M - T;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

double max_abs(const SparseMatrix& M) {
  double worst = 0.0;
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Largest step in [0, 1] keeping v + alpha * dv >= 0.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

// Linear inequality rows: the user's G followed by finite bounds.
struct LinearRows {
  SparseMatrix G;
  Eigen::VectorXd h;
};

LinearRows stack_linear_rows(const ConvexProgram& prog) {
  const int n = prog.num_variables();
  std::vector<Triplet> trips;
  std::vector<double> rhs;
  int row = 0;
  for (int k = 0; k < prog.G.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(prog.G, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  }
  row = static_cast<int>(prog.G.rows());
  for (int i = 0; i < prog.G.rows(); ++i) rhs.push_back(prog.h[i]);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(prog.lower[i])) {
      trips.emplace_back(row++, i, -1.0);
      rhs.push_back(-prog.lower[i]);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(prog.upper[i])) {
      trips.emplace_back(row++, i, 1.0);
      rhs.push_back(prog.upper[i]);
    }
  }
  LinearRows rows;
  rows.G.resize(row, n);
  rows.G.setFromTriplets(trips.begin(), trips.end());
  rows.h = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return rows;
}

class InteriorPoint {
 public:
  InteriorPoint(const ConvexProgram& prog, const SolverSettings& settings)
      : prog_(prog), settings_(settings), rows_(stack_linear_rows(prog)) {
    n_ = prog.num_variables();
    p_ = static_cast<int>(prog.A.rows());
    ml_ = static_cast<int>(rows_.G.rows());
    mq_ = static_cast<int>(prog.quadratic.size());
    m_ = ml_ + mq_;
    At_ = prog.A.transpose();
    Gt_ = rows_.G.transpose();
  }

  SolveResult run(const std::optional<Eigen::VectorXd>& warm_start);

 private:
  // Constraint values c(x) (<= 0 when feasible).
  Eigen::VectorXd constraint_values(const Eigen::VectorXd& x) const {
    Eigen::VectorXd c(m_);
    if (ml_ > 0) c.head(ml_) = rows_.G * x - rows_.h;
    for (int k = 0; k < mq_; ++k) c[ml_ + k] = prog_.quadratic[k].value(x);
    return c;
  }

  Eigen::VectorXd quad_gradient(int k, const Eigen::VectorXd& x) const {
    const auto& qc = prog_.quadratic[k];
    return qc.Q * x + qc.g;
  }

  // J' v for the stacked constraint Jacobian.
  Eigen::VectorXd jacobian_transpose(const std::vector<Eigen::VectorXd>& grads, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    if (ml_ > 0) out += Gt_ * v.head(ml_);
    for (int k = 0; k < mq_; ++k) out += v[ml_ + k] * grads[k];
    return out;
  }

  Eigen::VectorXd jacobian_times(const std::vector<Eigen::VectorXd>& grads, const Eigen::VectorXd& dx) const {
    Eigen::VectorXd out(m_);
    if (ml_ > 0) out.head(ml_) = rows_.G * dx;
    for (int k = 0; k < mq_; ++k) out[ml_ + k] = grads[k].dot(dx);
    return out;
  }

  bool factor(const Eigen::VectorXd& z, const Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& grads);
  Eigen::VectorXd solve_kkt(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd apply_kkt(const Eigen::VectorXd& v) const;

  const ConvexProgram& prog_;
  SolverSettings settings_;
  LinearRows rows_;
  int n_ = 0, p_ = 0, ml_ = 0, mq_ = 0, m_ = 0;
  SparseMatrix At_, Gt_;

  SparseMatrix kkt_;  // regularized, full symmetric
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  bool analyzed_ = false;
  Eigen::Index analyzed_nnz_ = -1;
  Eigen::MatrixXd low_rank_;      // U, (n + p) x mq
  Eigen::MatrixXd kkt_inv_u_;     // K^-1 U
  Eigen::PartialPivLU<Eigen::MatrixXd> capacitance_;
};

bool InteriorPoint::factor(const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                           const std::vector<Eigen::VectorXd>& grads) {
  SparseMatrix H = prog_.P;
  for (int k = 0; k < mq_; ++k) H += z[ml_ + k] * prog_.quadratic[k].Q;
  if (ml_ > 0) H += Gt_ * w.head(ml_).asDiagonal() * rows_.G;

  const int dim = n_ + p_;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * prog_.A.nonZeros() + dim));
  for (int k = 0; k < H.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  }
  for (int k = 0; k < prog_.A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(prog_.A, k); it; ++it) {
      trips.emplace_back(n_ + it.row(), it.col(), it.value());
      trips.emplace_back(it.col(), n_ + it.row(), it.value());
    }
  }
  for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, kPrimalReg);
  for (int i = 0; i < p_; ++i) trips.emplace_back(n_ + i, n_ + i, -kDualReg);
  kkt_.resize(dim, dim);
  kkt_.setFromTriplets(trips.begin(), trips.end());

  if (!analyzed_ || kkt_.nonZeros() != analyzed_nnz_) {
    ldlt_.analyzePattern(kkt_);
    analyzed_ = true;
    analyzed_nnz_ = kkt_.nonZeros();
  }
  ldlt_.factorize(kkt_);
  if (ldlt_.info() != Eigen::Success) return false;

  low_rank_.setZero(dim, mq_);
  for (int k = 0; k < mq_; ++k) low_rank_.col(k).head(n_) = std::sqrt(w[ml_ + k]) * grads[k];
  if (mq_ > 0) {
    kkt_inv_u_ = ldlt_.solve(low_rank_);
    Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(mq_, mq_) + low_rank_.transpose() * kkt_inv_u_;
    capacitance_.compute(cap);
  }
  return true;
}

Eigen::VectorXd InteriorPoint::apply_kkt(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = kkt_ * v;
  out.head(n_) -= kPrimalReg * v.head(n_);
  out.tail(p_) += kDualReg * v.tail(p_);
  if (mq_ > 0) out += low_rank_ * (low_rank_.transpose() * v);
  return out;
}

Eigen::VectorXd InteriorPoint::solve_kkt(const Eigen::VectorXd& rhs) const {
  auto solve_reg = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    Eigen::VectorXd y = ldlt_.solve(r);
    if (mq_ > 0) y -= kkt_inv_u_ * capacitance_.solve(low_rank_.transpose() * y);
    return y;
  };
  Eigen::VectorXd sol = solve_reg(rhs);
  for (int refine = 0; refine < 2; ++refine) {
    const Eigen::VectorXd residual = rhs - apply_kkt(sol);
    sol += solve_reg(residual);
  }
  return sol;
}

SolveResult InteriorPoint::run(const std::optional<Eigen::VectorXd>& warm_start) {
  SolveResult result;
  const double tol = settings_.tolerance;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
  if (warm_start && warm_start->size() == n_ && warm_start->allFinite()) x = *warm_start;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p_);
  Eigen::VectorXd s = (-constraint_values(x)).cwiseMax(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(m_);

  const double dual_scale = 1.0 + inf_norm(prog_.q);
  std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(mq_));

  auto finish = [&](SolveStatus status, int iterations) {
    result.status = status;
    result.x = x;
    result.objective = prog_.objective(x);
    result.max_violation = std::max(0.0, check_feasibility(prog_, x).max());
    result.duality_gap = m_ > 0 ? s.dot(z) : 0.0;
    result.iterations = iterations;
    result.equality_duals = y;
    result.inequality_duals = z;
    return result;
  };

  for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
    for (int k = 0; k < mq_; ++k) grads[k] = quad_gradient(k, x);
    const Eigen::VectorXd cx = constraint_values(x);

    Eigen::VectorXd r_d = prog_.P * x + prog_.q + jacobian_transpose(grads, z);
    if (p_ > 0) r_d += At_ * y;
    const Eigen::VectorXd r_p = p_ > 0 ? Eigen::VectorXd(prog_.A * x - prog_.b) : Eigen::VectorXd();
    const Eigen::VectorXd r_c = cx + s;

    if (!x.allFinite() || !z.allFinite() || !s.allFinite()) return finish(SolveStatus::kNumericFailure, iter);

    const double primal_violation = std::max(inf_norm(r_p), m_ > 0 ? std::max(0.0, cx.maxCoeff()) : 0.0);
    const double gap = m_ > 0 ? s.dot(z) : 0.0;
    const double fval = prog_.objective(x);
    if (primal_violation <= tol && inf_norm(r_c) <= tol && inf_norm(r_d) <= tol * dual_scale &&
        gap <= tol * (1.0 + std::abs(fval))) {
      return finish(SolveStatus::kOptimal, iter);
    }
    if (iter == settings_.max_iterations) break;
    if (m_ > 0 && z.maxCoeff() > kDualDivergence) return finish(SolveStatus::kInfeasible, iter);

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    if (!factor(z, w, grads)) return finish(SolveStatus::kNumericFailure, iter);

    // Newton direction for a given complementarity residual r_sz.
    auto direction = [&](const Eigen::VectorXd& r_sz, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                         Eigen::VectorXd& dz, Eigen::VectorXd& ds) {
      const Eigen::VectorXd t = w.cwiseProduct(r_c) - r_sz.cwiseQuotient(s);
      Eigen::VectorXd rhs(n_ + p_);
      rhs.head(n_) = -r_d - jacobian_transpose(grads, t);
      if (p_ > 0) rhs.tail(p_) = -r_p;
      const Eigen::VectorXd sol = solve_kkt(rhs);
      dx = sol.head(n_);
      dy = sol.tail(p_);
      dz = w.cwiseProduct(jacobian_times(grads, dx)) + t;
      ds = -(r_sz + s.cwiseProduct(dz)).cwiseQuotient(z);
    };

    Eigen::VectorXd dx, dy, dz, ds;
    if (m_ == 0) {
      direction(Eigen::VectorXd(), dx, dy, dz, ds);
      x += dx;
      y += dy;
      continue;
    }

    const double mu = gap / m_;
    direction(s.cwiseProduct(z), dx, dy, dz, ds);
    const double alpha_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff = (s + alpha_aff * ds).dot(z + alpha_aff * dz) / m_;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    const Eigen::VectorXd r_sz =
        s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(m_, sigma * mu);
    direction(r_sz, dx, dy, dz, ds);
    const double alpha = std::min(1.0, kStepFraction * std::min(max_step(s, ds), max_step(z, dz)));

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
  }
  return finish(SolveStatus::kMaxIterations, settings_.max_iterations);
}

nlohmann::json triplets(const SparseMatrix& M) {
  nlohmann::json out = nlohmann::json::array();
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) out.push_back({it.row(), it.col(), it.value()});
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"entries", out}};
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      out.push_back(v[i]);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

}  // namespace

double QuadraticConstraint::value(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(Q * x) + g.dot(x) + c;
}

ConvexProgram::ConvexProgram(int num_variables)
    : P(num_variables, num_variables),
      q(Eigen::VectorXd::Zero(num_variables)),
      A(0, num_variables),
      b(0),
      G(0, num_variables),
      h(0),
      lower(Eigen::VectorXd::Constant(num_variables, -kInf)),
      upper(Eigen::VectorXd::Constant(num_variables, kInf)) {}

double ConvexProgram::objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(P * x) + q.dot(x) + constant; }

void ConvexProgram::validate() const {
  const int n = num_variables();
  if (P.rows() != n || P.cols() != n) throw std::invalid_argument("convex program: P dimension mismatch");
  if (A.cols() != n || A.rows() != b.size()) throw std::invalid_argument("convex program: A/b dimension mismatch");
  if (G.cols() != n || G.rows() != h.size()) throw std::invalid_argument("convex program: G/h dimension mismatch");
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("convex program: bound dimension mismatch");
  const double sym_tol = 1e-9 * std::max(1.0, max_abs(P));
  if (asymmetry(P) > sym_tol) throw std::invalid_argument("convex program: P is not symmetric");
  if (!is_psd(P, 1e-8)) throw std::invalid_argument("convex program: P is not positive semidefinite");
  for (const auto& qc : quadratic) {
    if (qc.Q.rows() != n || qc.Q.cols() != n || qc.g.size() != n) {
      throw std::invalid_argument("convex program: quadratic constraint '" + qc.label + "' dimension mismatch");
    }
    if (asymmetry(qc.Q) > 1e-9 * std::max(1.0, max_abs(qc.Q)) || !is_psd(qc.Q, 1e-8)) {
      throw std::invalid_argument("convex program: quadratic constraint '" + qc.label + "' is not convex");
    }
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kMaxIterations:
      return "max-iterations";
    case SolveStatus::kNumericFailure:
      return "numeric-failure";
  }
  return "unknown";
}

SolveResult solve(const ConvexProgram& program, const std::optional<Eigen::VectorXd>& warm_start,
                  const SolverSettings& settings) {
  if (settings.check_convexity) program.validate();
  for (int i = 0; i < program.num_variables(); ++i) {
    if (program.lower[i] > program.upper[i]) {
      SolveResult r;
      r.status = SolveStatus::kInfeasible;
      r.x = Eigen::VectorXd::Zero(program.num_variables());
      r.max_violation = program.lower[i] - program.upper[i];
      return r;
    }
  }
  InteriorPoint ip(program, settings);
  return ip.run(warm_start);
}

double FeasibilityReport::max() const { return std::max({equality, inequality, quadratic, bounds}); }

FeasibilityReport check_feasibility(const ConvexProgram& program, const Eigen::VectorXd& point) {
  const int n = program.num_variables();
  if (point.size() != n) throw std::invalid_argument("check_feasibility: point dimension mismatch");
  FeasibilityReport report;
  report.equality = program.A.rows() > 0 ? (program.A * point - program.b).lpNorm<Eigen::Infinity>() : 0.0;
  report.inequality = program.G.rows() > 0 ? (program.G * point - program.h).maxCoeff() : -kInf;
  report.quadratic = -kInf;
  for (const auto& qc : program.quadratic) report.quadratic = std::max(report.quadratic, qc.value(point));
  report.bounds = -kInf;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(program.lower[i])) report.bounds = std::max(report.bounds, program.lower[i] - point[i]);
    if (std::isfinite(program.upper[i])) report.bounds = std::max(report.bounds, point[i] - program.upper[i]);
  }
  return report;
}

void dump(const ConvexProgram& program, std::ostream& out) {
  nlohmann::json doc;
  doc["format"] = "socnav-convex-program";
  doc["version"] = 1;
  doc["num_variables"] = program.num_variables();
  doc["variable_names"] = program.variable_names;
  doc["objective"] = {{"P", triplets(program.P)}, {"q", vector_json(program.q)}, {"constant", program.constant}};
  doc["equalities"] = {{"A", triplets(program.A)}, {"b", vector_json(program.b)}};
  doc["inequalities"] = {{"G", triplets(program.G)}, {"h", vector_json(program.h)}};
  nlohmann::json quad = nlohmann::json::array();
  for (const auto& qc : program.quadratic) {
    quad.push_back({{"label", qc.label}, {"Q", triplets(qc.Q)}, {"g", vector_json(qc.g)}, {"c", qc.c}});
  }
  doc["quadratic"] = quad;
  doc["bounds"] = {{"lower", vector_json(program.lower)}, {"upper", vector_json(program.upper)}};
  out << doc.dump(2) << '\n';
}

}  // namespace socnav
