#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using irsbf::BeamformingState;
using irsbf::ChannelSet;
using irsbf::ConeProblem;

cd cn(Rng& rng, double var) {
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  const double re = g(rng);
  return {re, g(rng)};
}

ChannelSet random_channels(Rng& rng, int M, int N, int K, int L, double scale) {
  ChannelSet ch;
  const double var = scale * scale;
  for (int k = 0; k < K; ++k) {
    Eigen::RowVectorXcd h(M);
    for (int m = 0; m < M; ++m) h[m] = cn(rng, var);
    ch.h_direct.push_back(h);
  }
  for (int n = 0; n < N; ++n) {
    Eigen::MatrixXcd H(L, M);
    for (int l = 0; l < L; ++l)
      for (int m = 0; m < M; ++m) H(l, m) = cn(rng, var);
    ch.H_bs_irs.push_back(H);
    std::vector<Eigen::RowVectorXcd> rows;
    for (int k = 0; k < K; ++k) {
      Eigen::RowVectorXcd h(L);
      for (int l = 0; l < L; ++l) h[l] = cn(rng, 1.0);
      rows.push_back(h);
    }
    ch.h_irs_user.push_back(rows);
  }
  return ch;
}

BeamformingState random_state(Rng& rng, const ChannelSet& ch, double p_total, bool unit_modulus) {
  BeamformingState s;
  const int M = ch.M(), N = ch.N(), K = ch.K(), L = ch.L();
  s.P.resize(M, K);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) s.P(m, k) = cn(rng);
  s.P *= std::sqrt(p_total) / s.P.norm();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXcd t(L);
    for (int l = 0; l < L; ++l) t[l] = std::polar(unit_modulus ? 1.0 : u(rng), 2.0 * M_PI * u(rng));
    s.theta.push_back(t);
  }
  s.A = irsbf::Selection::Zero(N, K);
  std::uniform_int_distribution<int> pick(0, K - 1);
  for (int n = 0; n < N; ++n) s.A(n, pick(rng)) = 1;
  return s;
}

std::vector<double> sinrs(const ChannelSet& ch, const BeamformingState& s, double noise, bool direct) {
  const int M = ch.M(), N = ch.N(), K = ch.K(), L = ch.L();
  // g[k][i] = (sum_n a_nk sum_l conj(theta_nl) h_nk^H[l] (H_n p_i)[l]) + h_k^H p_i
  std::vector<std::vector<cd>> g(K, std::vector<cd>(K, 0.0));
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K; ++i) {
      cd acc = 0.0;
      if (direct)
        for (int m = 0; m < M; ++m) acc += ch.h_direct[k][m] * s.P(m, i);
      for (int n = 0; n < N; ++n) {
        if (s.A(n, k) == 0) continue;
        for (int l = 0; l < L; ++l) {
          cd hp = 0.0;
          for (int m = 0; m < M; ++m) hp += ch.H_bs_irs[n](l, m) * s.P(m, i);
          acc += std::conj(s.theta[n][l]) * ch.h_irs_user[n][k][l] * hp;
        }
      }
      g[k][i] = acc;
    }
  std::vector<double> out(K);
  for (int k = 0; k < K; ++k) {
    double interf = noise;
    for (int i = 0; i < K; ++i)
      if (i != k) interf += std::norm(g[k][i]);
    out[k] = std::norm(g[k][k]) / interf;
  }
  return out;
}

double sum_rate(const std::vector<double>& sinr) {
  double r = 0.0;
  for (double s : sinr) r += std::log2(1.0 + s);
  return r;
}

std::vector<std::vector<int>> all_assignments(int N, int K) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(N, 0);
  while (true) {
    out.push_back(a);
    int n = N - 1;
    while (n >= 0 && ++a[n] == K) a[n--] = 0;
    if (n < 0) break;
  }
  return out;
}

ConeProblem random_cone_problem(Rng& rng, int dim, int socs, bool boxes, int q_rank) {
  ConeProblem p;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXcd F(dim, q_rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < q_rank; ++j) F(i, j) = cn(rng, 1.0 / dim);
  p.Q = F * F.adjoint();
  p.v.resize(dim);
  for (int i = 0; i < dim; ++i) p.v[i] = cn(rng, 4.0);
  p.offset = u(rng);
  std::vector<int> all(dim);
  for (int i = 0; i < dim; ++i) all[i] = i;
  p.balls.push_back({all, 0.8 * std::sqrt(static_cast<double>(dim))});
  if (boxes) p.box.assign(dim, true);

  Eigen::VectorXcd x0(dim);
  for (int i = 0; i < dim; ++i) x0[i] = std::polar(0.5 * u(rng), 2.0 * M_PI * u(rng));
  for (int c = 0; c < socs; ++c) {
    irsbf::SocConstraint s;
    const int rows = 1 + static_cast<int>(u(rng) * 3.0);
    s.lhs.resize(dim);
    for (int i = 0; i < dim; ++i) s.lhs[i] = cn(rng);
    s.rhs.resize(rows, dim);
    s.rhs_offset.resize(rows);
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < dim; ++i) s.rhs(r, i) = cn(rng);
      s.rhs_offset[r] = cn(rng, 0.1);
    }
    s.sigma = 0.3;
    // lhs x0 + c = 1 and a 30% margin in the cone at x0.
    s.lhs_offset = cd(1.0, 0.0) - (s.lhs * x0)(0);
    Eigen::VectorXcd r0 = s.rhs * x0 + s.rhs_offset;
    s.gain = 1.3 * std::sqrt(r0.squaredNorm() + s.sigma * s.sigma);
    p.socs.push_back(std::move(s));
  }
  return p;
}

namespace {

struct Block {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  enum Kind { ball, soc } kind = ball;
  double radius = 0.0;
};

// Real rows of a complex row form over interleaved (re, im) coordinates.
void put_form(Eigen::MatrixXd& A, int re_row, int im_row, const Eigen::RowVectorXcd& a, double scale) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    A(re_row, 2 * j) = scale * a[j].real();
    A(re_row, 2 * j + 1) = -scale * a[j].imag();
    A(im_row, 2 * j) = scale * a[j].imag();
    A(im_row, 2 * j + 1) = scale * a[j].real();
  }
}

Eigen::VectorXd project(const Block& bl, Eigen::VectorXd y) {
  if (bl.kind == Block::ball) {
    const double n = y.norm();
    if (n > bl.radius) y *= bl.radius / n;
    return y;
  }
  y[1] = 0.0;
  const double t = y[0];
  const double nz = y.tail(y.size() - 2).norm();
  if (nz <= t) return y;
  if (nz <= -t) {
    y.setZero();
    return y;
  }
  const double a = 0.5 * (t + nz);
  y[0] = a;
  y.tail(y.size() - 2) *= a / nz;
  return y;
}

}  // namespace

AdmmResult admm_solve(const ConeProblem& p, int max_iter, double tol) {
  const int n = p.dim();
  const int dn = 2 * n;
  Eigen::MatrixXd Qr = Eigen::MatrixXd::Zero(dn, dn);
  Eigen::VectorXd vr(dn);
  for (int i = 0; i < n; ++i) {
    vr[2 * i] = p.v[i].real();
    vr[2 * i + 1] = p.v[i].imag();
    for (int j = 0; j < n; ++j) {
      const cd q = p.Q(i, j);
      Qr(2 * i, 2 * j) = q.real();
      Qr(2 * i, 2 * j + 1) = -q.imag();
      Qr(2 * i + 1, 2 * j) = q.imag();
      Qr(2 * i + 1, 2 * j + 1) = q.real();
    }
  }

  std::vector<Block> blocks;
  for (const auto& ball : p.balls) {
    Block bl;
    const int m = 2 * static_cast<int>(ball.selector.size());
    bl.A = Eigen::MatrixXd::Zero(m, dn);
    bl.b = Eigen::VectorXd::Zero(m);
    for (std::size_t s = 0; s < ball.selector.size(); ++s) {
      bl.A(2 * s, 2 * ball.selector[s]) = 1.0;
      bl.A(2 * s + 1, 2 * ball.selector[s] + 1) = 1.0;
    }
    bl.radius = ball.radius;
    blocks.push_back(std::move(bl));
  }
  for (int j = 0; j < static_cast<int>(p.box.size()); ++j) {
    if (!p.box[j]) continue;
    Block bl;
    bl.A = Eigen::MatrixXd::Zero(2, dn);
    bl.A(0, 2 * j) = 1.0;
    bl.A(1, 2 * j + 1) = 1.0;
    bl.b = Eigen::VectorXd::Zero(2);
    bl.radius = 1.0;
    blocks.push_back(std::move(bl));
  }
  for (const auto& s : p.socs) {
    Block bl;
    bl.kind = Block::soc;
    const int R = static_cast<int>(s.rhs.rows());
    const int m = 2 + 2 * R + 1;
    bl.A = Eigen::MatrixXd::Zero(m, dn);
    bl.b = Eigen::VectorXd::Zero(m);
    put_form(bl.A, 0, 1, s.lhs, s.gain);
    bl.b[0] = s.gain * s.lhs_offset.real();
    bl.b[1] = s.gain * s.lhs_offset.imag();
    for (int r = 0; r < R; ++r) {
      put_form(bl.A, 2 + 2 * r, 3 + 2 * r, s.rhs.row(r), 1.0);
      if (s.rhs_offset.size()) {
        bl.b[2 + 2 * r] = s.rhs_offset[r].real();
        bl.b[3 + 2 * r] = s.rhs_offset[r].imag();
      }
    }
    bl.b[m - 1] = s.sigma;
    blocks.push_back(std::move(bl));
  }

  int rows = 0;
  for (const auto& bl : blocks) rows += static_cast<int>(bl.A.rows());
  Eigen::MatrixXd A(rows, dn);
  Eigen::VectorXd b(rows);
  {
    int r = 0;
    for (const auto& bl : blocks) {
      A.middleRows(r, bl.A.rows()) = bl.A;
      b.segment(r, bl.b.size()) = bl.b;
      r += static_cast<int>(bl.A.rows());
    }
  }
  const Eigen::MatrixXd AtA = A.transpose() * A;

  double rho = 1.0;
  auto factor = [&](double r) { return Eigen::LDLT<Eigen::MatrixXd>(2.0 * Qr + r * AtA + 1e-12 * Eigen::MatrixXd::Identity(dn, dn)); };
  auto ldlt = factor(rho);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dn);
  Eigen::VectorXd y = b, u = Eigen::VectorXd::Zero(rows);
  auto project_all = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd out(rows);
    int r = 0;
    for (const auto& bl : blocks) {
      const auto m = bl.A.rows();
      out.segment(r, m) = project(bl, w.segment(r, m));
      r += static_cast<int>(m);
    }
    return out;
  };

  AdmmResult res;
  for (int it = 0; it < max_iter; ++it) {
    x = ldlt.solve(2.0 * vr - rho * A.transpose() * (b - y + u));
    const Eigen::VectorXd Axb = A * x + b;
    const Eigen::VectorXd y_prev = y;
    y = project_all(Axb + u);
    u += Axb - y;
    const double rp = (Axb - y).norm();
    const double rd = rho * (A.transpose() * (y - y_prev)).norm();
    res.iterations = it + 1;
    res.primal_residual = rp;
    const double scale = 1.0 + std::max(Axb.norm(), y.norm());
    if (rp < tol * scale && rd < tol * (1.0 + rho * (A.transpose() * u).norm())) break;
    if (it % 50 == 49) {
      double next = rho;
      if (rp > 10.0 * rd) next = rho * 2.0;
      else if (rd > 10.0 * rp) next = rho / 2.0;
      if (next != rho) {
        u *= rho / next;
        rho = next;
        ldlt = factor(rho);
      }
    }
  }
  res.x.resize(n);
  for (int i = 0; i < n; ++i) res.x[i] = cd(x[2 * i], x[2 * i + 1]);
  res.objective = p.objective(res.x);
  return res;
}

}  // namespace oracle
