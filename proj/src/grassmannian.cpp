#include "isoproj/grassmannian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isoproj/errors.hpp"
#include "isoproj/parallel.hpp"

namespace isoproj {

namespace {

constexpr std::size_t kChunk = 1 << 14;

Eigen::MatrixXcd gaussian_complex(int n, RngStream& rng, bool square_first) {
  Eigen::MatrixXcd g(n, n);
  const double scale = std::numbers::sqrt2 / 2.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = {re * scale, im * scale};
    }
  }
  if (square_first) g(0, 0) = {g(0, 0).real() * g(0, 0).real() * 2.0, g(0, 0).imag()};
  return g;
}

Eigen::MatrixXcd haar_complex(int n, RngStream& rng, bool biased = false) {
  for (;;) {
    const Eigen::MatrixXcd g = gaussian_complex(n, rng, biased);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    const Eigen::MatrixXcd& packed = qr.matrixQR();
    bool singular = false;
    for (int j = 0; j < n; ++j) singular = singular || std::abs(packed(j, j)) < 1e-300;
    if (singular) continue;
    Eigen::MatrixXcd q = qr.householderQ();
    for (int j = 0; j < n; ++j) q.col(j) *= packed(j, j) / std::abs(packed(j, j));
    return q;
  }
}

IsotropicSubspace first_columns(const Eigen::MatrixXcd& q, int m) {
  const int n = static_cast<int>(q.rows());
  const std::size_t dim = 2 * static_cast<std::size_t>(n);
  std::vector<double> rows(static_cast<std::size_t>(m) * dim);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) {
      rows[k * dim + i] = q(i, k).real();
      rows[k * dim + n + i] = q(i, k).imag();
    }
  }
  return IsotropicSubspace(Frame(dim, std::move(rows)));
}

void check_nm(int n, int m) {
  if (n < 1) throw ArgumentError("n must be >= 1");
  if (m < 1 || m > n) {
    throw ArgumentError("isotropic subspaces need 1 <= m <= n (got n=" + std::to_string(n) +
                        ", m=" + std::to_string(m) + ")");
  }
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double gaussian_density(std::span<const double> a, double sigma) {
  double r2 = 0;
  for (double v : a) r2 += v * v;
  const double d = static_cast<double>(a.size());
  return std::exp(-0.5 * r2 / (sigma * sigma)) / std::pow(2.0 * std::numbers::pi * sigma * sigma, d / 2.0);
}

constexpr double kBumpRadius = 1.5;

double anisotropic_width(std::size_t i) { return 0.6 * std::pow(1.5, static_cast<double>(i)); }

// Proposal used for a catalogue function in dimension d.
struct Proposal {
  bool gaussian = true;
  double scale = 1.0;  // sigma for Gaussian, radius for uniform ball

  void draw(RngStream& rng, std::span<double> out) const {
    if (gaussian) {
      for (double& v : out) v = scale * rng.normal();
      return;
    }
    double r2 = 0;
    for (double& v : out) {
      v = rng.normal();
      r2 += v * v;
    }
    const double radius = scale * std::pow(rng.uniform_open(), 1.0 / static_cast<double>(out.size()));
    const double f = radius / std::sqrt(r2);
    for (double& v : out) v *= f;
  }

  double density(std::span<const double> a) const {
    if (gaussian) return gaussian_density(a, scale);
    const int d = static_cast<int>(a.size());
    return 1.0 / (unit_ball_volume(d) * std::pow(scale, d));
  }
};

Proposal proposal_for(TestFunction f, std::size_t ambient_dim) {
  switch (f) {
    case TestFunction::IsotropicGaussian:
      return {true, 1.25};
    case TestFunction::AnisotropicGaussian:
      return {true, 1.25 * anisotropic_width(ambient_dim - 1)};
    case TestFunction::Bump:
    case TestFunction::Zero:
      return {false, kBumpRadius};
    case TestFunction::Constant:
      break;
  }
  throw ArgumentError("test function '" + to_string(f) + "' is not integrable");
}

struct Moments {
  NeumaierSum sum, sum_sq;
};

MonteCarloEstimate finish(const std::vector<Moments>& chunks, std::size_t samples) {
  NeumaierSum s, s2;
  for (const Moments& c : chunks) {
    s.add(c.sum.value());
    s2.add(c.sum_sq.value());
  }
  MonteCarloEstimate e;
  e.samples = samples;
  const double n = static_cast<double>(samples);
  e.value = s.value() / n;
  const double var = std::max(0.0, (s2.value() - n * e.value * e.value) / std::max(1.0, n - 1));
  e.standard_error = std::sqrt(var / n);
  return e;
}

}  // namespace

UnitaryAction::UnitaryAction(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() % 2 != 0 || matrix_.rows() == 0) {
    throw ArgumentError("UnitaryAction: need a square 2n x 2n matrix");
  }
  const Eigen::Index d = matrix_.rows();
  const Eigen::MatrixXd gram = matrix_.transpose() * matrix_;
  if ((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
    throw ArgumentError("UnitaryAction: matrix is not orthogonal");
  }
  const Eigen::Index n = d / 2;
  const Eigen::MatrixXd a = matrix_.topLeftCorner(n, n), b = matrix_.bottomLeftCorner(n, n);
  const double off = std::max((matrix_.bottomRightCorner(n, n) - a).cwiseAbs().maxCoeff(),
                              (matrix_.topRightCorner(n, n) + b).cwiseAbs().maxCoeff());
  if (off > 1e-10) throw ArgumentError("UnitaryAction: matrix does not commute with J");
}

UnitaryAction UnitaryAction::identity(int n) {
  if (n < 1) throw ArgumentError("UnitaryAction::identity: n must be >= 1");
  return UnitaryAction(Eigen::MatrixXd::Identity(2 * n, 2 * n));
}

UnitaryAction UnitaryAction::from_complex(const Eigen::MatrixXcd& u) {
  const Eigen::Index n = u.rows();
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = u.real();
  m.topRightCorner(n, n) = -u.imag();
  m.bottomLeftCorner(n, n) = u.imag();
  m.bottomRightCorner(n, n) = u.real();
  return UnitaryAction(std::move(m));
}

Point UnitaryAction::apply(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != matrix_.rows()) {
    throw ArgumentError("UnitaryAction::apply: dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd r = matrix_ * v;
  return Point(r.data(), r.data() + r.size());
}

IsotropicSubspace UnitaryAction::apply(const IsotropicSubspace& v) const {
  const Frame& f = v.frame();
  std::vector<double> rows;
  rows.reserve(f.rows().size());
  for (std::size_t k = 0; k < f.rank(); ++k) {
    const Point q = apply(f.vector(k));
    rows.insert(rows.end(), q.begin(), q.end());
  }
  return IsotropicSubspace(Frame(f.dim(), std::move(rows), f.tolerance()));
}

UnitaryAction sample_unitary(int n, RngStream& rng) {
  if (n < 1) throw ArgumentError("sample_unitary: n must be >= 1");
  return UnitaryAction::from_complex(haar_complex(n, rng));
}

IsotropicSubspace sample_isotropic_subspace(int n, int m, RngStream& rng) {
  check_nm(n, m);
  return first_columns(haar_complex(n, rng), m);
}

IsotropicSubspace sample_biased_subspace(int n, int m, RngStream& rng) {
  check_nm(n, m);
  return first_columns(haar_complex(n, rng, true), m);
}

MonteCarloEstimate smallness_probability(std::span<const double> x, int m, double delta,
                                         std::size_t trials, RngStream& rng) {
  const double deltas[] = {delta};
  return smallness_sweep(x, m, deltas, trials, rng).estimates.front();
}

SmallnessSweep smallness_sweep(std::span<const double> x, int m, std::span<const double> deltas,
                               std::size_t trials, RngStream& rng, unsigned threads) {
  if (x.empty() || x.size() % 2 != 0) throw ArgumentError("smallness: x must lie in R^{2n}");
  const int n = static_cast<int>(x.size() / 2);
  check_nm(n, m);
  const double xnorm = norm(x);
  if (xnorm == 0.0) throw ArgumentError("smallness: x = 0 makes the bound singular");
  if (trials == 0) throw ArgumentError("smallness: trials must be >= 1");
  if (deltas.empty()) throw ArgumentError("smallness: empty delta grid");
  for (double d : deltas) {
    if (!(d > 0)) throw ArgumentError("smallness: delta must be positive");
  }

  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::vector<std::size_t>> hits(chunks, std::vector<std::size_t>(deltas.size(), 0));
  const RngStream base = rng.split(0x5a11);
  parallel_for(chunks, threads, [&](std::size_t c) {
    RngStream local = base.split(c);
    const std::size_t begin = c * kChunk, end = std::min(trials, begin + kChunk);
    for (std::size_t t = begin; t < end; ++t) {
      const IsotropicSubspace v = sample_isotropic_subspace(n, m, local);
      const std::vector<double> coords = v.coordinates(x);
      const double len = norm(coords);
      for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (len <= deltas[k] || deltas[k] >= xnorm) ++hits[c][k];
      }
    }
  });
  rng = rng.split(0x5a12);

  SmallnessSweep out;
  out.deltas.assign(deltas.begin(), deltas.end());
  std::vector<double> lx, ly, lw;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::size_t total = 0;
    for (const auto& h : hits) total += h[k];
    MonteCarloEstimate e;
    e.samples = trials;
    e.value = static_cast<double>(total) / static_cast<double>(trials);
    e.standard_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    out.estimates.push_back(e);
    if (total > 0 && total < trials) {
      lx.push_back(std::log(deltas[k]));
      ly.push_back(std::log(e.value));
      // Var(log p_hat) ~ (1 - p) / (trials p), so weight by the inverse.
      lw.push_back(static_cast<double>(total) / (1.0 - e.value));
    }
  }
  if (lx.size() >= 2) out.loglog = fit_line(lx, ly, lw);
  return out;
}

std::string to_string(TestFunction f) {
  switch (f) {
    case TestFunction::IsotropicGaussian: return "isotropic_gaussian";
    case TestFunction::AnisotropicGaussian: return "anisotropic_gaussian";
    case TestFunction::Bump: return "bump";
    case TestFunction::Zero: return "zero";
    case TestFunction::Constant: return "constant";
  }
  return "unknown";
}

TestFunction test_function_from_string(const std::string& name) {
  for (TestFunction f : {TestFunction::IsotropicGaussian, TestFunction::AnisotropicGaussian,
                         TestFunction::Bump, TestFunction::Zero, TestFunction::Constant}) {
    if (to_string(f) == name) return f;
  }
  throw ArgumentError("unknown test function '" + name + "'");
}

double evaluate_test_function(TestFunction f, std::span<const double> x) {
  switch (f) {
    case TestFunction::IsotropicGaussian: {
      double r2 = 0;
      for (double v : x) r2 += v * v;
      return std::exp(-0.5 * r2);
    }
    case TestFunction::AnisotropicGaussian: {
      double q = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = anisotropic_width(i);
        q += x[i] * x[i] / (s * s);
      }
      return std::exp(-0.5 * q);
    }
    case TestFunction::Bump: {
      double r2 = 0;
      for (double v : x) r2 += v * v;
      const double rho2 = r2 / (kBumpRadius * kBumpRadius);
      return rho2 < 1.0 ? std::exp(-1.0 / (1.0 - rho2)) : 0.0;
    }
    case TestFunction::Zero: return 0.0;
    case TestFunction::Constant: return 1.0;
  }
  return 0.0;
}

DisintegrationResult disintegration_check(TestFunction f, int n, int m, std::size_t samples,
                                          RngStream& rng, unsigned threads) {
  check_nm(n, m);
  if (samples == 0) throw ArgumentError("disintegration_check: samples must be >= 1");
  const std::size_t dim = 2 * static_cast<std::size_t>(n);
  const Proposal full = proposal_for(f, dim);
  // The subspace proposal uses the same law restricted to m dimensions.
  const Proposal plane = full;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Moments> lhs(chunks), rhs(chunks);
  const RngStream lhs_base = rng.split(0xd150), rhs_base = rng.split(0xd151);
  const double power = static_cast<double>(dim) - static_cast<double>(m);

  parallel_for(chunks, threads, [&](std::size_t c) {
    RngStream lr = lhs_base.split(c), rr = rhs_base.split(c);
    std::vector<double> x(dim), a(static_cast<std::size_t>(m));
    const std::size_t begin = c * kChunk, end = std::min(samples, begin + kChunk);
    for (std::size_t s = begin; s < end; ++s) {
      full.draw(lr, x);
      const double wl = evaluate_test_function(f, x) / full.density(x);
      lhs[c].sum.add(wl);
      lhs[c].sum_sq.add(wl * wl);

      const IsotropicSubspace v = sample_isotropic_subspace(n, m, rr);
      plane.draw(rr, a);
      const Point u = v.frame().embed(a);
      const double wr = std::pow(norm(a), power) * evaluate_test_function(f, u) / plane.density(a);
      rhs[c].sum.add(wr);
      rhs[c].sum_sq.add(wr * wr);
    }
  });
  rng = rng.split(0xd152);

  DisintegrationResult out;
  out.lhs = finish(lhs, samples);
  out.rhs = finish(rhs, samples);
  if (out.rhs.value != 0.0) {
    out.ratio = out.lhs.value / out.rhs.value;
    const double rl = out.lhs.value != 0.0 ? out.lhs.standard_error / out.lhs.value : 0.0;
    const double rr = out.rhs.standard_error / out.rhs.value;
    out.ratio_stderr = std::abs(out.ratio) * std::sqrt(rl * rl + rr * rr);
  }
  return out;
}

namespace {

double invariance_statistic(InvarianceStatistic s, const IsotropicSubspace& v,
                            std::span<const double> x0) {
  const std::vector<double> coords = v.coordinates(x0);
  if (s == InvarianceStatistic::ProjectionNorm) return norm(coords);
  return coords[0] * coords[0];
}

}  // namespace

InvarianceReport invariance_test(int n, int m, InvarianceStatistic statistic, std::size_t trials,
                                 RngStream& rng, const UnitaryAction& w, SubspaceSampler sampler) {
  check_nm(n, m);
  if (w.n() != n) throw ArgumentError("invariance_test: W has the wrong size");
  if (trials < 2) throw ArgumentError("invariance_test: need at least two trials");
  Point x0(2 * static_cast<std::size_t>(n), 0.0);
  x0[0] = 1.0;
  std::vector<double> plain, moved;
  plain.reserve(trials);
  moved.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const IsotropicSubspace v = sampler == SubspaceSampler::Haar
                                    ? sample_isotropic_subspace(n, m, rng)
                                    : sample_biased_subspace(n, m, rng);
    plain.push_back(invariance_statistic(statistic, v, x0));
    moved.push_back(invariance_statistic(statistic, w.apply(v), x0));
  }
  InvarianceReport r;
  r.trials = trials;
  r.ks = ks_two_sample(std::move(plain), std::move(moved), 0.01);
  r.pass = !r.ks.reject;
  return r;
}

InvarianceReport invariance_test(int n, int m, InvarianceStatistic statistic, std::size_t trials,
                                 RngStream& rng, SubspaceSampler sampler) {
  check_nm(n, m);
  RngStream wr = rng.split(0x1a7);
  const UnitaryAction w = sample_unitary(n, wr);
  return invariance_test(n, m, statistic, trials, rng, w, sampler);
}

}  // namespace isoproj
