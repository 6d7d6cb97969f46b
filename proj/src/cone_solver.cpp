#include "irsbf/cone_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace irsbf {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Problem-level helpers

double ConeProblem::objective(const Eigen::VectorXcd& x) const {
  const cd quad = x.dot(Q * x);  // x^H Q x
  return -quad.real() + 2.0 * v.dot(x).real() - offset;
}

namespace {

cd form_value(const Eigen::RowVectorXcd& a, const Eigen::VectorXcd& x, cd offset) {
  return (a * x)(0) + offset;
}

cd rhs_offset(const SocConstraint& s, Eigen::Index i) {
  return s.rhs_offset.size() == 0 ? cd{} : s.rhs_offset[i];
}

}  // namespace

ConstraintViolation constraint_violation(const ConeProblem& p, const Eigen::VectorXcd& x) {
  ConstraintViolation out;
  for (const auto& b : p.balls) {
    double w = 0.0;
    for (int j : b.selector) w += std::norm(x[j]);
    out.ball_box = std::max(out.ball_box, std::sqrt(w) - b.radius);
  }
  for (std::size_t j = 0; j < p.box.size(); ++j)
    if (p.box[j]) out.ball_box = std::max(out.ball_box, std::abs(x[static_cast<Eigen::Index>(j)]) - 1.0);
  for (const auto& s : p.socs) {
    const cd l = form_value(s.lhs, x, s.lhs_offset);
    double r2 = s.sigma * s.sigma;
    for (Eigen::Index i = 0; i < s.rhs.rows(); ++i)
      r2 += std::norm((s.rhs.row(i) * x)(0) + rhs_offset(s, i));
    const double rn = std::sqrt(r2);
    const double scale = std::max({rn, s.gain * std::abs(l), std::numeric_limits<double>::min()});
    out.soc = std::max(out.soc, (rn - s.gain * l.real()) / scale);
    out.equality = std::max(out.equality, std::abs(l.imag()) / std::max(std::abs(l), scale));
  }
  out.ball_box = std::max(out.ball_box, 0.0);
  out.soc = std::max(out.soc, 0.0);
  return out;
}

void check_problem(const ConeProblem& p) {
  const auto n = p.dim();
  auto bad = [](const std::string& m) { throw std::invalid_argument("ConeProblem: " + m); };
  if (p.Q.rows() != n || p.Q.cols() != n) bad("Q must be dim x dim");
  if (p.Q_factor.cols() > 0 && p.Q_factor.rows() != n) bad("Q_factor must have dim rows");
  if (!p.box.empty() && static_cast<int>(p.box.size()) != n) bad("box flags must be empty or dim long");
  for (const auto& b : p.balls) {
    if (!(b.radius >= 0.0)) bad("ball radius must be >= 0");
    for (int j : b.selector)
      if (j < 0 || j >= n) bad("ball selector out of range");
  }
  for (const auto& s : p.socs) {
    if (!(s.gain > 0.0)) bad("SOC gain must be > 0");
    if (s.lhs.size() != n || s.rhs.cols() != n) bad("SOC forms must have dim entries");
    if (s.rhs_offset.size() != 0 && s.rhs_offset.size() != s.rhs.rows()) bad("SOC rhs offsets mismatch");
  }
  const double qn = p.Q.size() ? p.Q.cwiseAbs().maxCoeff() : 0.0;
  if (qn > 0.0) {
    if ((p.Q - p.Q.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * qn) bad("Q is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.Q, Eigen::EigenvaluesOnly);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-9 * norm) bad("Q is not positive semidefinite");
  }
}

// ---------------------------------------------------------------------------
// Real lifting. Complex coordinate j occupies real coordinates 2j and 2j+1.

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec lift(const Eigen::VectorXcd& x) {
  Vec r(2 * x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    r[2 * j] = x[j].real();
    r[2 * j + 1] = x[j].imag();
  }
  return r;
}

Eigen::VectorXcd unlift(const Eigen::Ref<const Vec>& r) {
  Eigen::VectorXcd x(r.size() / 2);
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = {r[2 * j], r[2 * j + 1]};
  return x;
}

// Rows with re * x = Re{a x} and im * x = Im{a x}.
void lift_form(const Eigen::RowVectorXcd& a, double s, Eigen::Ref<Eigen::RowVectorXd> re,
               Eigen::Ref<Eigen::RowVectorXd> im) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    re[2 * j] = s * a[j].real();
    re[2 * j + 1] = -s * a[j].imag();
    im[2 * j] = s * a[j].imag();
    im[2 * j + 1] = s * a[j].real();
  }
}

struct LiftedBall {
  std::vector<int> coords;  // real coordinates
  double radius;
};

struct LiftedBox {
  int j;  // complex coordinate
  double radius;
};

struct LiftedSoc {
  Mat G;  // u = G x + h, u(0) is the cone head
  Vec h;
};

/// The normalized real problem: minimize x'Qx - 2c'x with x = x_orig / xs and the
/// objective divided by fs. Every cone is rescaled to unit size, which leaves it unchanged.
struct Lifted {
  int n = 0;
  double xs = 1.0;
  double fs = 1.0;
  bool dense_q = false;
  Mat WQ;  // Q = WQ WQ'
  Mat Qd;  // Q when dense_q
  Vec c;
  std::vector<LiftedBall> balls;
  std::vector<LiftedBox> boxes;
  std::vector<LiftedSoc> socs;
  Mat E;  // E x = e
  Vec e;
  bool eq_inconsistent = false;
  bool covers_all = false;

  int num_cones() const { return static_cast<int>(balls.size() + boxes.size() + socs.size()); }
  double theta() const { return 2.0 * num_cones(); }
  int lowrank_cols() const {
    int r = static_cast<int>(WQ.cols() + balls.size());
    for (const auto& s : socs) r += static_cast<int>(s.G.rows());
    return r;
  }

  double F(const Vec& x) const {
    const double quad = dense_q ? x.dot(Qd * x) : (WQ.cols() ? (WQ.transpose() * x).squaredNorm() : 0.0);
    return quad - 2.0 * c.dot(x);
  }

  Vec gradF(const Vec& x) const {
    Vec g = -2.0 * c;
    if (dense_q)
      g.noalias() += 2.0 * (Qd * x);
    else if (WQ.cols())
      g.noalias() += 2.0 * (WQ * (WQ.transpose() * x));
    return g;
  }
};

Lifted lift_problem(const ConeProblem& p) {
  Lifted L;
  const int dim = p.dim();
  L.n = 2 * dim;

  const bool has_box = std::any_of(p.box.begin(), p.box.end(), [](bool b) { return b; });
  if (!has_box && !p.balls.empty()) {
    double xs = 0.0;
    for (const auto& b : p.balls)
      xs = std::max(xs, b.radius / std::sqrt(std::max<double>(1.0, static_cast<double>(b.selector.size()))));
    if (xs > 0.0) L.xs = xs;
  }
  const double qmax = p.Q.size() ? p.Q.cwiseAbs().maxCoeff() : 0.0;
  const double vmax = p.v.size() ? p.v.cwiseAbs().maxCoeff() : 0.0;
  L.fs = std::max(qmax * L.xs * L.xs, vmax * L.xs);
  if (!(L.fs > 0.0)) L.fs = 1.0;

  L.c = lift(p.v) * (L.xs / L.fs);

  Eigen::MatrixXcd factor;
  if (p.Q_factor.cols() > 0) {
    factor = p.Q_factor;
  } else if (qmax > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.Q);
    const auto& lam = es.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (lam[i] > 1e-13 * top) keep.push_back(i);
    factor.resize(dim, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      factor.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(lam[keep[c]]);
  }
  if (2 * factor.cols() <= L.n / 2) {
    const double s = L.xs / std::sqrt(L.fs);
    L.WQ.resize(L.n, 2 * factor.cols());
    Eigen::RowVectorXd re(L.n), im(L.n);
    for (Eigen::Index c = 0; c < factor.cols(); ++c) {
      lift_form(factor.col(c).adjoint(), s, re, im);
      L.WQ.col(2 * c) = re.transpose();
      L.WQ.col(2 * c + 1) = im.transpose();
    }
  } else {
    L.dense_q = true;
    L.Qd.resize(L.n, L.n);
    const double s = L.xs * L.xs / L.fs;
    for (int j = 0; j < dim; ++j)
      for (int l = 0; l < dim; ++l) {
        const cd q = p.Q(j, l) * s;
        L.Qd(2 * j, 2 * l) = q.real();
        L.Qd(2 * j, 2 * l + 1) = -q.imag();
        L.Qd(2 * j + 1, 2 * l) = q.imag();
        L.Qd(2 * j + 1, 2 * l + 1) = q.real();
      }
  }

  std::vector<bool> covered(dim, false);
  for (const auto& b : p.balls) {
    LiftedBall lb{{}, b.radius / L.xs};
    for (int j : b.selector) {
      lb.coords.push_back(2 * j);
      lb.coords.push_back(2 * j + 1);
      covered[j] = true;
    }
    L.balls.push_back(std::move(lb));
  }
  for (int j = 0; j < static_cast<int>(p.box.size()); ++j)
    if (p.box[j]) {
      L.boxes.push_back({j, 1.0 / L.xs});
      covered[j] = true;
    }
  L.covers_all = std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });

  std::vector<Eigen::RowVectorXd> eq_rows;
  std::vector<double> eq_rhs;
  for (const auto& s : p.socs) {
    const auto R = s.rhs.rows();
    const auto m = 2 + 2 * R;
    LiftedSoc ls{Mat::Zero(m, L.n), Vec::Zero(m)};
    Eigen::RowVectorXd re(L.n), im(L.n);
    lift_form(s.lhs, L.xs, re, im);
    ls.G.row(0) = s.gain * re;
    ls.h[0] = s.gain * s.lhs_offset.real();
    for (Eigen::Index i = 0; i < R; ++i) {
      Eigen::RowVectorXd rre(L.n), rim(L.n);
      lift_form(s.rhs.row(i), L.xs, rre, rim);
      ls.G.row(1 + 2 * i) = rre;
      ls.G.row(2 + 2 * i) = rim;
      const cd off = rhs_offset(s, i);
      ls.h[1 + 2 * i] = off.real();
      ls.h[2 + 2 * i] = off.imag();
    }
    ls.h[m - 1] = s.sigma;
    double scale = ls.h.cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < m; ++r) scale = std::max(scale, ls.G.row(r).norm());
    if (scale > 0.0) {
      ls.G /= scale;
      ls.h /= scale;
    }
    L.socs.push_back(std::move(ls));

    const double rn = im.norm();
    if (rn > 0.0) {
      eq_rows.push_back(im / rn);
      eq_rhs.push_back(-s.lhs_offset.imag() / rn);
    } else if (s.lhs_offset.imag() != 0.0) {
      L.eq_inconsistent = true;
    }
  }
  L.E.resize(static_cast<Eigen::Index>(eq_rows.size()), L.n);
  L.e.resize(static_cast<Eigen::Index>(eq_rows.size()));
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    L.E.row(static_cast<Eigen::Index>(i)) = eq_rows[i];
    L.e[static_cast<Eigen::Index>(i)] = eq_rhs[i];
  }
  return L;
}

// u0^2 - |ubar|^2, or a non-positive value when u lies outside the open cone.
double cone_margin(double u0, double ubar_sq) {
  if (!(u0 > 0.0)) return -1.0;
  return u0 * u0 - ubar_sq;
}

double ball_sq(const LiftedBall& b, const Vec& x) {
  double w = 0.0;
  for (int i : b.coords) w += x[i] * x[i];
  return w;
}

// ---------------------------------------------------------------------------
// Newton system: H = blockdiag(D) + W W' (+ dense part), with optional phase-one
// variable s as the last coordinate.

class NewtonSystem {
 public:
  NewtonSystem(int n, int ny, bool dense, int max_cols) : n_(n), ny_(ny), dense_(dense) {
    if (dense_) {
      H_ = Mat::Zero(ny, ny);
    } else {
      D_.assign(static_cast<std::size_t>(n / 2), Eigen::Matrix2d::Zero());
      W_ = Mat::Zero(ny, max_cols);
    }
  }

  bool dense() const { return dense_; }

  void add_block(int j, const Eigen::Matrix2d& B) {
    if (dense_)
      H_.block<2, 2>(2 * j, 2 * j) += B;
    else
      D_[static_cast<std::size_t>(j)] += B;
  }

  // H += C C'.
  void add_lowrank(const Eigen::Ref<const Mat>& C) {
    if (dense_) {
      H_.noalias() += C * C.transpose();
    } else {
      W_.middleCols(cols_, C.cols()) = C;
      cols_ += static_cast<int>(C.cols());
    }
  }

  // H += C C' for a single column given by sparse coordinates.
  void add_lowrank_sparse(const std::vector<int>& idx, const Vec& vals) {
    if (dense_) {
      for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) H_(idx[a], idx[b]) += vals[a] * vals[b];
    } else {
      for (std::size_t a = 0; a < idx.size(); ++a) W_(idx[a], cols_) = vals[a];
      ++cols_;
    }
  }

  Mat& dense_matrix() { return H_; }

  bool factor() {
    if (dense_) return factor_dense();
    return factor_structured();
  }

  Mat solve(const Mat& B) const { return dense_ ? solve_dense(B) : solve_structured(B); }

 private:
  bool factor_dense() {
    llt_.compute(H_);
    if (llt_.info() == Eigen::Success) return true;
    const double scale = std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff());
    for (double reg = 1e-14; reg <= 1e-6; reg *= 100.0) {
      Mat Hr = H_;
      Hr.diagonal().array() += reg * scale;
      llt_.compute(Hr);
      if (llt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  Mat solve_dense(const Mat& B) const { return llt_.solve(B); }

  bool factor_structured() {
    const int nb = n_ / 2;
    Dinv_.resize(static_cast<std::size_t>(nb));
    for (int j = 0; j < nb; ++j) {
      const auto& B = D_[static_cast<std::size_t>(j)];
      const double det = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
      if (!(det > 0.0) || !(B(0, 0) > 0.0)) return false;
      Eigen::Matrix2d inv;
      inv << B(1, 1), -B(0, 1), -B(1, 0), B(0, 0);
      Dinv_[static_cast<std::size_t>(j)] = inv / det;
    }
    Wx_ = W_.topRows(n_).leftCols(cols_);
    DW_ = apply_dinv(Wx_);
    Mat C = Mat::Identity(cols_, cols_);
    C.noalias() += Wx_.transpose() * DW_;
    cap_.compute(C);
    if (cap_.info() != Eigen::Success) return false;
    if (ny_ > n_) {
      const Eigen::VectorXd ws = W_.row(n_).head(cols_).transpose();
      border_b_ = Wx_ * ws;
      border_c_ = ws.squaredNorm();
      border_y_ = apply_ainv(border_b_);
      border_schur_ = border_c_ - border_b_.dot(border_y_);
      if (!(border_schur_ > 0.0)) return false;
    }
    return true;
  }

  Mat apply_dinv(const Mat& B) const {
    Mat out(B.rows(), B.cols());
    for (int j = 0; j < n_ / 2; ++j) out.middleRows<2>(2 * j).noalias() = Dinv_[static_cast<std::size_t>(j)] * B.middleRows<2>(2 * j);
    return out;
  }

  Mat apply_a(const Mat& X) const {
    Mat out(X.rows(), X.cols());
    for (int j = 0; j < n_ / 2; ++j) out.middleRows<2>(2 * j).noalias() = D_[static_cast<std::size_t>(j)] * X.middleRows<2>(2 * j);
    out.noalias() += Wx_ * (Wx_.transpose() * X);
    return out;
  }

  // (D + Wx Wx')^{-1} B by the Woodbury identity, with one refinement step.
  Mat apply_ainv(const Mat& B) const {
    auto once = [&](const Mat& rhs) {
      Mat y = apply_dinv(rhs);
      Mat corr = cap_.solve(DW_.transpose() * rhs);
      y.noalias() -= DW_ * corr;
      return y;
    };
    Mat X = once(B);
    const Mat R = B - apply_a(X);
    X += once(R);
    return X;
  }

  Mat solve_structured(const Mat& B) const {
    if (ny_ == n_) return apply_ainv(B);
    Mat out(ny_, B.cols());
    const Mat y1 = apply_ainv(B.topRows(n_));
    for (Eigen::Index c = 0; c < B.cols(); ++c) {
      const double ds = (B(n_, c) - border_b_.dot(y1.col(c))) / border_schur_;
      out.col(c).head(n_) = y1.col(c) - border_y_ * ds;
      out(n_, c) = ds;
    }
    return out;
  }

  int n_;
  int ny_;
  bool dense_;
  Mat H_;
  Eigen::LLT<Mat> llt_;
  std::vector<Eigen::Matrix2d> D_;
  std::vector<Eigen::Matrix2d> Dinv_;
  Mat W_;
  int cols_ = 0;
  Mat Wx_;
  Mat DW_;
  Eigen::LLT<Mat> cap_;
  Vec border_b_;
  double border_c_ = 0.0;
  Vec border_y_;
  double border_schur_ = 0.0;
};

// ---------------------------------------------------------------------------

// Symmetric square root of the Hessian of -log(u0^2 - |ubar|^2): the Hessian equals
// 2 P(s)^2 with P(s) = 2 s s' - det(s) J the quadratic representation of the Jordan
// square root s of u^{-1}. Avoids factoring a matrix whose condition grows like 1/d^2.
Mat soc_hessian_root(const Vec& u) {
  const auto m = u.size();
  const double nb = u.tail(m - 1).norm();
  const double lp = u[0] + nb;
  const double lm = (u[0] * u[0] - nb * nb) / lp;
  const double rp = 1.0 / std::sqrt(lp);
  const double rm = 1.0 / std::sqrt(lm);
  Vec sv = Vec::Zero(m);
  sv[0] = 0.5 * (rp + rm);
  if (nb > 0.0) sv.tail(m - 1) = (0.5 * (rp - rm) / nb) * u.tail(m - 1);
  const double det = rp * rm;
  Mat R = 2.0 * sv * sv.transpose();
  R(0, 0) -= det;
  R.diagonal().tail(m - 1).array() += det;
  return std::sqrt(2.0) * R;
}

enum class Phase {
  one_soc,  // minimize s, only the SOC heads are shifted by s
  one_all,  // minimize s, every cone head is shifted by s
  two,      // minimize F
};

struct KktParts {
  Multipliers mult;
  double residual = 0.0;
};

class Barrier {
 public:
  Barrier(const Lifted& L, const SolveOptions& o) : L_(L), opts_(o) {}

  int iterations() const { return iters_; }
  // Set when a Newton system could not be factored or the line search failed.
  bool stalled() const { return stalled_; }
  bool out_of_budget() const { return iters_ >= opts_.max_iter; }

  void set_phase(Phase p) {
    phase_ = p;
    ny_ = phase_ == Phase::two ? L_.n : L_.n + 1;
    if (phase_ == Phase::two && L_.E.rows() > 0) {
      Eaug_ = L_.E;
    } else {
      Eaug_ = Mat::Zero(L_.E.rows(), ny_);
      if (L_.E.rows() > 0) Eaug_.leftCols(L_.n) = L_.E;
    }
    structured_ = !opts_.force_dense && L_.covers_all && !L_.dense_q && phase_ != Phase::one_all &&
                  L_.lowrank_cols() * 2 < L_.n;
  }

  double shift(const Vec& y) const { return phase_ == Phase::two ? 0.0 : y[L_.n]; }

  double value(const Vec& y, double t) const {
    const auto x = y.head(L_.n);
    const double s = shift(y);
    double acc = phase_ == Phase::two ? t * L_.F(x) : t * s;
    const double sb = phase_ == Phase::one_all ? s : 0.0;
    for (const auto& b : L_.balls) {
      const double d = cone_margin(b.radius + sb, ball_sq(b, x));
      if (!(d > 0.0)) return kInf;
      acc -= std::log(d);
    }
    for (const auto& b : L_.boxes) {
      const double w = x[2 * b.j] * x[2 * b.j] + x[2 * b.j + 1] * x[2 * b.j + 1];
      const double d = cone_margin(b.radius + sb, w);
      if (!(d > 0.0)) return kInf;
      acc -= std::log(d);
    }
    for (const auto& c : L_.socs) {
      Vec u = c.G * x + c.h;
      u[0] += s;
      const double d = cone_margin(u[0], u.tail(u.size() - 1).squaredNorm());
      if (!(d > 0.0)) return kInf;
      acc -= std::log(d);
    }
    return acc;
  }

  // Newton direction for the barrier problem at y. Returns false if the system is singular.
  bool direction(const Vec& y, double t, Vec& dy, Vec& g) {
    const auto x = y.head(L_.n);
    const double s = shift(y);
    const double sb = phase_ == Phase::one_all ? s : 0.0;
    const bool has_s = phase_ != Phase::two;
    NewtonSystem sys(L_.n, ny_, !structured_, L_.lowrank_cols() + 1);

    g = Vec::Zero(ny_);
    if (phase_ == Phase::two) {
      g.head(L_.n) = t * L_.gradF(x);
      if (L_.dense_q)
        sys.dense_matrix().topLeftCorner(L_.n, L_.n) += (2.0 * t) * L_.Qd;
      else if (L_.WQ.cols())
        sys.add_lowrank(std::sqrt(2.0 * t) * L_.WQ);
    } else {
      g[L_.n] = t;
    }

    for (const auto& b : L_.balls) {
      const double u0 = b.radius + sb;
      const double d = cone_margin(u0, ball_sq(b, x));
      Vec ybar(b.coords.size());
      for (std::size_t i = 0; i < b.coords.size(); ++i) ybar[i] = x[b.coords[i]];
      for (std::size_t i = 0; i < b.coords.size(); ++i) g[b.coords[i]] += 2.0 * ybar[i] / d;
      for (std::size_t i = 0; i < b.coords.size(); i += 2)
        sys.add_block(b.coords[i] / 2, Eigen::Matrix2d::Identity() * (2.0 / d));
      sys.add_lowrank_sparse(b.coords, ybar * (2.0 / d));
      if (phase_ == Phase::one_all) add_head_coupling(sys, g, b.coords, ybar, u0, d);
    }
    for (const auto& b : L_.boxes) {
      const double u0 = b.radius + sb;
      Eigen::Vector2d yb(x[2 * b.j], x[2 * b.j + 1]);
      const double d = cone_margin(u0, yb.squaredNorm());
      g.segment<2>(2 * b.j) += 2.0 * yb / d;
      Eigen::Matrix2d B = Eigen::Matrix2d::Identity() * (2.0 / d) + (4.0 / (d * d)) * yb * yb.transpose();
      sys.add_block(b.j, B);
      if (phase_ == Phase::one_all) {
        const std::vector<int> coords{2 * b.j, 2 * b.j + 1};
        add_head_coupling(sys, g, coords, Vec(yb), u0, d);
      }
    }
    for (const auto& c : L_.socs) {
      const auto m = c.G.rows();
      Vec u = c.G * x + c.h;
      u[0] += s;
      const double d = cone_margin(u[0], u.tail(m - 1).squaredNorm());
      Vec Ju = -u;
      Ju[0] = u[0];
      const Vec gu = -2.0 * Ju / d;
      g.head(L_.n).noalias() += c.G.transpose() * gu;
      if (has_s) g[L_.n] += gu[0];
      const Mat Lm = soc_hessian_root(u);
      Mat C(ny_, m);
      C.topRows(L_.n).noalias() = c.G.transpose() * Lm;
      if (has_s) C.row(L_.n) = Lm.row(0);
      sys.add_lowrank(C);
    }

    if (!sys.factor()) return false;

    const auto p = Eaug_.rows();
    Mat rhs(ny_, 1 + p);
    rhs.col(0) = -g;
    if (p > 0) rhs.rightCols(p) = Eaug_.transpose();
    const Mat X = sys.solve(rhs);
    dy = X.col(0);
    if (p > 0) {
      const Mat Z = X.rightCols(p);
      const Mat S = Eaug_ * Z;
      const Vec nu = S.completeOrthogonalDecomposition().solve(Eaug_ * dy);
      dy.noalias() -= Z * nu;
    }
    return dy.allFinite();
  }

  // Newton iterations at fixed t. Returns the final decrement; in phase one it stops as
  // soon as s < 0.
  double center(Vec& y, double t) {
    double dec = kInf;
    double prev = kInf;
    Vec dy, g;
    for (int it = 0; it < 60 && !out_of_budget(); ++it) {
      if (!direction(y, t, dy, g)) {
        stalled_ = true;
        break;
      }
      dec = -g.dot(dy);
      if (dec / 2.0 <= 1e-11) break;
      // Below 1e-6 the decrement should shrink quadratically; if it does not, the
      // linear algebra has reached its accuracy floor.
      if (dec < 1e-6 && dec > 0.25 * prev) break;
      prev = dec;
      double alpha = 1.0;
      if (dec <= 1.0 / 16.0 && std::isfinite(value(y + dy, t))) {
        // Newton decrement below 1/4: the full step of a self-concordant barrier stays
        // feasible and converges quadratically. Function values at large t are too
        // coarse for an Armijo test here.
      } else {
        const double f0 = value(y, t);
        while (alpha > 1e-18 && !std::isfinite(value(y + alpha * dy, t))) alpha *= 0.5;
        const double slope = g.dot(dy);
        while (alpha > 1e-18 && value(y + alpha * dy, t) > f0 + 0.01 * alpha * slope) alpha *= 0.5;
      }
      ++iters_;
      if (alpha <= 1e-18) {
        stalled_ = true;
        break;
      }
      y += alpha * dy;
      if (phase_ != Phase::two && y[L_.n] < 0.0) break;
    }
    return dec;
  }

  // Dual estimate at a phase-two point. Near the boundary the plain barrier estimate
  // inherits the centering error amplified by the barrier Hessian, so it is also
  // linearized along the Newton step (the primal-dual estimate); the better one wins.
  KktParts kkt(Vec& x, double t) {
    KktParts out;
    Vec dx = Vec::Zero(L_.n), g;
    const bool stepped = phase_ == Phase::two && direction(x, t, dx, g);
    if (!stepped) dx.setZero();
    Multipliers corrected;
    auto push = [&](const Vec& u, const Vec& du) {
      out.mult.cones.push_back(barrier_dual(u, t));
      corrected.cones.push_back(barrier_dual(u, t) + barrier_dual_step(u, du, t));
    };
    for (const auto& b : L_.balls) {
      Vec u(1 + b.coords.size()), du = Vec::Zero(1 + b.coords.size());
      u[0] = b.radius;
      for (std::size_t i = 0; i < b.coords.size(); ++i) {
        u[1 + static_cast<Eigen::Index>(i)] = x[b.coords[i]];
        du[1 + static_cast<Eigen::Index>(i)] = dx[b.coords[i]];
      }
      push(u, du);
    }
    for (const auto& b : L_.boxes) {
      Vec u(3), du(3);
      u << b.radius, x[2 * b.j], x[2 * b.j + 1];
      du << 0.0, dx[2 * b.j], dx[2 * b.j + 1];
      push(u, du);
    }
    for (const auto& c : L_.socs) push(c.G * x + c.h, c.G * dx);
    out.mult.eq = equality_multipliers(x, out.mult.cones);
    out.residual = residual(x, out.mult);
    if (stepped) {
      corrected.eq = equality_multipliers(x, corrected.cones);
      const double r = residual(x, corrected);
      // For a quadratic F the linearized estimate is exactly stationary at x + dx.
      const Vec moved = x + dx;
      const bool inside = std::isfinite(value(moved, t));
      Multipliers at_moved = corrected;
      double r_moved = kInf;
      if (inside) {
        at_moved.eq = equality_multipliers(moved, at_moved.cones);
        r_moved = residual(moved, at_moved);
      }
      if (r_moved < std::min(r, out.residual)) {
        x = moved;
        out.mult = std::move(at_moved);
        out.residual = r_moved;
      } else if (r < out.residual) {
        out.mult = std::move(corrected);
        out.residual = r;
      }
    }
    return out;
  }

  Vec equality_multipliers(const Vec& x, const std::vector<Vec>& z) const {
    if (L_.E.rows() == 0) return Vec();
    const Vec r = stationarity_base(x, z);
    const Mat EEt = L_.E * L_.E.transpose();
    return -EEt.completeOrthogonalDecomposition().solve(L_.E * r);
  }

  // grad F - sum_i G_i' z_i
  Vec stationarity_base(const Vec& x, const std::vector<Vec>& z) const {
    Vec r = L_.gradF(x);
    std::size_t ci = 0;
    for (const auto& b : L_.balls) {
      const Vec& zi = z[ci++];
      for (std::size_t i = 0; i < b.coords.size(); ++i) r[b.coords[i]] -= zi[1 + static_cast<Eigen::Index>(i)];
    }
    for (const auto& b : L_.boxes) {
      const Vec& zi = z[ci++];
      r[2 * b.j] -= zi[1];
      r[2 * b.j + 1] -= zi[2];
    }
    for (const auto& c : L_.socs) r.noalias() -= c.G.transpose() * z[ci++];
    return r;
  }

  double residual(const Vec& x, const Multipliers& m) const {
    if (m.cones.size() != static_cast<std::size_t>(L_.num_cones()))
      throw std::invalid_argument("kkt_residual: multiplier count does not match the cones");
    Vec r = stationarity_base(x, m.cones);
    if (L_.E.rows() > 0) {
      if (m.eq.size() != L_.E.rows()) throw std::invalid_argument("kkt_residual: equality multiplier count");
      r.noalias() += L_.E.transpose() * m.eq;
    }
    double res = r.cwiseAbs().maxCoeff();
    if (L_.E.rows() > 0) res = std::max(res, (L_.E * x - L_.e).cwiseAbs().maxCoeff());
    double comp = 0.0;
    auto cone_terms = [&](const Vec& u, const Vec& z) {
      res = std::max(res, u.tail(u.size() - 1).norm() - u[0]);
      res = std::max(res, z.tail(z.size() - 1).norm() - z[0]);
      comp += std::abs(u.dot(z));
    };
    std::size_t ci = 0;
    for (const auto& b : L_.balls) {
      Vec u(1 + b.coords.size());
      u[0] = b.radius;
      for (std::size_t i = 0; i < b.coords.size(); ++i) u[1 + static_cast<Eigen::Index>(i)] = x[b.coords[i]];
      cone_terms(u, m.cones[ci++]);
    }
    for (const auto& b : L_.boxes) {
      Vec u(3);
      u << b.radius, x[2 * b.j], x[2 * b.j + 1];
      cone_terms(u, m.cones[ci++]);
    }
    for (const auto& c : L_.socs) cone_terms(c.G * x + c.h, m.cones[ci++]);
    return std::max(res, comp);
  }

 private:
  // Derivative of barrier_dual along du.
  static Vec barrier_dual_step(const Vec& u, const Vec& du, double t) {
    const double d = u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
    Vec Ju = -u, Jdu = -du;
    Ju[0] = u[0];
    Jdu[0] = du[0];
    return (2.0 / t) * (Jdu / d - Ju * (2.0 * u.dot(Jdu) / (d * d)));
  }

  static Vec barrier_dual(const Vec& u, double t) {
    const double d = u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
    Vec z = -u * (2.0 / (t * d));
    z[0] = -z[0];
    return z;
  }

  // Terms of a ball or box whose head is u0 = r + s (dense system only).
  void add_head_coupling(NewtonSystem& sys, Vec& g, const std::vector<int>& coords, const Vec& ybar,
                         double u0, double d) {
    auto& H = sys.dense_matrix();
    const int si = L_.n;
    g[si] += -2.0 * u0 / d;
    H(si, si) += -2.0 / d + 4.0 * u0 * u0 / (d * d);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const double v = -4.0 * u0 * ybar[static_cast<Eigen::Index>(i)] / (d * d);
      H(si, coords[i]) += v;
      H(coords[i], si) += v;
    }
    // The ybar ybar' term is already included through add_lowrank_sparse / the box block.
  }

  const Lifted& L_;
  const SolveOptions& opts_;
  Phase phase_ = Phase::two;
  int ny_ = 0;
  bool structured_ = false;
  Mat Eaug_;
  int iters_ = 0;
  bool stalled_ = false;
};

// Largest violation of the SOC heads (positive means infeasible).
double soc_violation(const Lifted& L, const Vec& x) {
  double v = -kInf;
  for (const auto& c : L.socs) {
    const Vec u = c.G * x + c.h;
    v = std::max(v, u.tail(u.size() - 1).norm() - u[0]);
  }
  return v;
}

double ballbox_violation(const Lifted& L, const Vec& x) {
  double v = -kInf;
  for (const auto& b : L.balls) v = std::max(v, std::sqrt(ball_sq(b, x)) - b.radius);
  for (const auto& b : L.boxes)
    v = std::max(v, std::hypot(x[2 * b.j], x[2 * b.j + 1]) - b.radius);
  return v;
}

bool strictly_inside_ballbox(const Lifted& L, const Vec& x) {
  for (const auto& b : L.balls)
    if (ball_sq(b, x) > 0.98 * b.radius * b.radius) return false;
  for (const auto& b : L.boxes)
    if (x[2 * b.j] * x[2 * b.j] + x[2 * b.j + 1] * x[2 * b.j + 1] > 0.98 * b.radius * b.radius) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

SolveReport solve(const ConeProblem& problem, const std::optional<Eigen::VectorXcd>& warm_start,
                  const SolveOptions& opts) {
  check_problem(problem);
  const Lifted L = lift_problem(problem);
  SolveReport rep;
  auto finish = [&](const Vec& x, SolveStatus st, int iters) {
    rep.x = unlift(x) * L.xs;
    rep.objective = problem.objective(rep.x);
    rep.status = st;
    rep.iterations = iters;
    return rep;
  };

  Vec x = Vec::Zero(L.n);
  if (warm_start && warm_start->size() == problem.dim()) x = lift(*warm_start) / L.xs;

  if (L.eq_inconsistent) return finish(x, SolveStatus::infeasible, 0);

  // Equality-feasible start inside the balls and boxes.
  Vec x_ln = Vec::Zero(L.n);
  if (L.E.rows() > 0) {
    const Mat EEt = L.E * L.E.transpose();
    const auto cod = EEt.completeOrthogonalDecomposition();
    x_ln = L.E.transpose() * cod.solve(L.e);
    x -= L.E.transpose() * cod.solve(L.E * x - L.e);
    if ((L.E * x_ln - L.e).cwiseAbs().maxCoeff() > 1e-9) return finish(x, SolveStatus::infeasible, 0);
  }
  bool interior = strictly_inside_ballbox(L, x);
  for (double lam = 0.9; !interior && lam > 1e-3; lam *= 0.5) {
    const Vec cand = x_ln + lam * (x - x_ln);
    if (strictly_inside_ballbox(L, cand)) {
      x = cand;
      interior = true;
    }
  }
  if (!interior && strictly_inside_ballbox(L, x_ln)) {
    x = x_ln;
    interior = true;
  }

  Barrier bar(L, opts);

  // Phase one.
  const bool need_phase_one =
      !L.socs.empty() && (soc_violation(L, x) > -1e-9 || !interior) ? true : (!interior && L.num_cones() > 0);
  if (need_phase_one) {
    const Phase ph = interior ? Phase::one_soc : Phase::one_all;
    bar.set_phase(ph);
    double viol = L.socs.empty() ? -kInf : soc_violation(L, x);
    if (ph == Phase::one_all) viol = std::max(viol, ballbox_violation(L, x));
    Vec y(L.n + 1);
    y.head(L.n) = x;
    y[L.n] = std::max(viol, 0.0) + 1.0;
    const double theta1 = L.theta();
    double t = 1.0;
    bool feasible = false;
    while (!bar.out_of_budget() && !bar.stalled()) {
      const double dec = bar.center(y, t);
      if (y[L.n] < 0.0) {
        feasible = true;
        break;
      }
      const bool centered = dec / 2.0 <= 1e-8;
      if (centered && y[L.n] - theta1 / t > 0.0) break;
      if (theta1 / t < 1e-13 * std::max(1.0, std::abs(y[L.n]))) break;
      t *= opts.mu;
    }
    if (!feasible) {
      const auto st = bar.out_of_budget() ? SolveStatus::max_iter : SolveStatus::infeasible;
      return finish(y.head(L.n), st, bar.iterations());
    }
    x = y.head(L.n);
  }

  // Phase two.
  bar.set_phase(Phase::two);
  const double theta = L.theta();
  double t = 1.0;
  SolveStatus status = SolveStatus::max_iter;
  KktParts last;
  while (true) {
    bar.center(x, t);
    last = bar.kkt(x, t);
    const double F = L.F(x);
    rep.objective_trace.push_back(-L.fs * F - problem.offset);
    rep.kkt_trace.push_back(last.residual);
    const double gap = theta / t;
    if (gap <= opts.gap_tol * std::max(1.0, std::abs(F)) && last.residual <= opts.dual_tol &&
        ballbox_violation(L, x) <= opts.feas_tol) {
      status = SolveStatus::optimal;
      break;
    }
    if (bar.out_of_budget() || bar.stalled()) break;
    if (theta == 0.0) {
      // Unconstrained: one more Newton solve cannot change anything.
      if (last.residual <= opts.dual_tol) status = SolveStatus::optimal;
      break;
    }
    // Overshooting t past what the tolerances need only hurts conditioning.
    const double t_need =
        theta / (0.5 * std::min(opts.dual_tol, opts.gap_tol * std::max(1.0, std::abs(F))));
    t = t < t_need ? std::min(t * opts.mu, t_need) : t * opts.mu;
  }
  rep.multipliers = last.mult;
  rep.kkt_residual = last.residual;
  return finish(x, status, bar.iterations());
}

double kkt_residual(const ConeProblem& problem, const Eigen::VectorXcd& x, const Multipliers& multipliers) {
  const Lifted L = lift_problem(problem);
  SolveOptions opts;
  Barrier bar(L, opts);
  return bar.residual(lift(x) / L.xs, multipliers);
}

}  // namespace irsbf
