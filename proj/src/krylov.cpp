#include "anderson/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace anderson {

namespace {

double rdot(const Field& a, const Field& b) { return inner(a, b).real(); }

}  // namespace

CGResult conjugate_gradient(const LinearOp& A, const Field& b, double tol, int max_iter, const LinearOp& precond,
                            const Field* x0) {
  CGResult res;
  const double bn = norm_l2(b);
  res.x = x0 ? to_frequency(*x0) : Field(b.grid(), Rep::frequency);
  if (bn == 0.0) {
    res.converged = true;
    res.x = Field(b.grid(), Rep::frequency);
    return res;
  }
  Field r = to_frequency(b);
  if (x0) r -= A(res.x);
  Field z = precond ? precond(r) : r;
  Field p = z;
  double rz = rdot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    Field Ap = A(p);
    double pAp = rdot(p, Ap);
    if (!(pAp > 0.0)) throw SolverError("conjugate_gradient: operator is not positive definite", res.history);
    double a = rz / pAp;
    res.x.axpy(a, p);
    r.axpy(-a, Ap);
    double rel = norm_l2(r) / bn;
    res.history.push_back(rel);
    res.iterations = it;
    res.rel_residual = rel;
    if (rel <= tol) {
      res.converged = true;
      return res;
    }
    z = precond ? precond(r) : r;
    double rz_new = rdot(r, z);
    p *= rz_new / rz;
    p += z;
    rz = rz_new;
  }
  return res;
}

namespace {

struct Lanczos {
  std::vector<Field> V;
  std::vector<double> alpha, beta;  // beta[i] couples V[i] and V[i+1]
  bool breakdown = false;

  void step(const LinearOp& A) {
    const Field& v = V.back();
    Field w = A(v);
    double a = rdot(w, v);
    w.axpy(-a, v);
    if (V.size() > 1) w.axpy(-beta.back(), V[V.size() - 2]);
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : V) w.axpy(-inner(w, q), q);
    alpha.push_back(a);
    double b = norm_l2(w);
    double scale = std::abs(a) + (beta.empty() ? 0.0 : beta.back());
    if (b <= 1e-14 * std::max(1.0, scale)) {
      breakdown = true;
      return;
    }
    beta.push_back(b);
    w *= 1.0 / b;
    V.push_back(std::move(w));
  }

  int size() const { return static_cast<int>(alpha.size()); }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig() const {
    const int m = size();
    Eigen::VectorXd d(m), e(std::max(0, m - 1));
    for (int i = 0; i < m; ++i) d(i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) e(i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    return es;
  }

  // coefficients of fn(T) e_1 in the basis V
  Eigen::VectorXd coeffs(const std::function<double(double)>& fn) const {
    auto es = eig();
    const auto& Q = es.eigenvectors();
    Eigen::VectorXd fl(size());
    for (int i = 0; i < size(); ++i) fl(i) = fn(es.eigenvalues()(i)) * Q(0, i);
    return Q * fl;
  }
};

}  // namespace

LanczosResult lanczos_apply(const LinearOp& A, const Field& f, const std::function<double(double)>& fn,
                            const LanczosOptions& opt) {
  LanczosResult res;
  const double fn0 = norm_l2(f);
  res.value = Field(f.grid(), Rep::frequency);
  if (fn0 == 0.0) {
    res.converged = true;
    return res;
  }
  Lanczos lz;
  Field v = to_frequency(f);
  v *= 1.0 / fn0;
  lz.V.push_back(std::move(v));
  Eigen::VectorXd prev;
  while (lz.size() < opt.max_steps) {
    lz.step(A);
    const int m = lz.size();
    if (lz.breakdown || m % opt.check_every == 0 || m == opt.max_steps) {
      Eigen::VectorXd c = lz.coeffs(fn);
      if (lz.breakdown) {
        res.breakdown = res.converged = true;
        prev = c;
        break;
      }
      if (prev.size() > 0) {
        Eigen::VectorXd pad = Eigen::VectorXd::Zero(c.size());
        pad.head(prev.size()) = prev;
        if ((c - pad).norm() <= opt.tol * c.norm()) {
          prev = c;
          res.converged = true;
          break;
        }
      }
      prev = c;
    }
  }
  if (prev.size() == 0) prev = lz.coeffs(fn);
  for (int i = 0; i < prev.size(); ++i) res.value.axpy(fn0 * prev(i), lz.V[i]);
  res.steps = lz.size();
  return res;
}

SpectrumBounds lanczos_extremes(const LinearOp& A, const Field& start, int steps) {
  Lanczos lz;
  Field v = to_frequency(start);
  v *= 1.0 / norm_l2(v);
  lz.V.push_back(std::move(v));
  while (lz.size() < steps && !lz.breakdown) lz.step(A);
  auto es = lz.eig();
  const int m = lz.size();
  SpectrumBounds sb;
  sb.lo = es.eigenvalues()(0);
  sb.hi = es.eigenvalues()(m - 1);
  double resid = lz.breakdown ? 0.0 : std::abs(lz.beta.back() * es.eigenvectors()(m - 1, m - 1));
  sb.hi_bound = sb.hi + resid;
  sb.steps = m;
  return sb;
}

}  // namespace anderson
