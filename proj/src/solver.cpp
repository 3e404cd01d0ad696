#include "nasolve/solver.hpp"

#include "nasolve/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace nasolve {

std::string_view to_string(Method m)
{
  switch (m) {
  case Method::newton:
    return "newton";
  case Method::na:
    return "na";
  case Method::gna:
    return "gna";
  case Method::agna:
    return "agna";
  }
  return "?";
}

Method parse_method(std::string_view s)
{
  if (s == "newton")
    return Method::newton;
  if (s == "na")
    return Method::na;
  if (s == "gna")
    return Method::gna;
  if (s == "agna")
    return Method::agna;
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

std::string to_string(const Activation &a)
{
  switch (a.kind) {
  case Activation::Kind::always:
    return "always";
  case Activation::Kind::preasymptotic:
    return "preasymptotic";
  case Activation::Kind::asymptotic: {
    char buf[64];
    std::snprintf(buf, sizeof buf, "asymptotic(%g)", a.threshold);
    return buf;
  }
  }
  return "?";
}

std::string_view to_string(SafeguardCase c)
{
  switch (c) {
  case SafeguardCase::not_applied:
    return "not_applied";
  case SafeguardCase::gamma_zero_or_ge_one:
    return "gamma_zero_or_ge_one";
  case SafeguardCase::ratio_exceeded:
    return "ratio_exceeded";
  case SafeguardCase::pass_through:
    return "pass_through";
  }
  return "?";
}

std::string_view to_string(SolveStatus s)
{
  switch (s) {
  case SolveStatus::converged:
    return "converged";
  case SolveStatus::diverged:
    return "diverged";
  case SolveStatus::singular_jacobian:
    return "singular_jacobian";
  case SolveStatus::max_iter:
    return "max_iter";
  }
  return "?";
}

void SolverConfig::validate() const
{
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (depth < 1)
    throw ConfigError("depth m must be at least 1");
  if (method == Method::gna && !open_unit(r))
    throw ConfigError("r must lie in (0, 1)");
  if (method == Method::agna && !open_unit(r_hat))
    throw ConfigError("r_hat must lie in (0, 1)");
  if (activation.kind == Activation::Kind::asymptotic && !(activation.threshold > 0.0))
    throw ConfigError("asymptotic activation threshold must be positive");
  if (switch_to_m1_at) {
    if (!(*switch_to_m1_at > 0.0))
      throw ConfigError("switch_to_m1_at must be positive");
    if (method != Method::gna && method != Method::agna)
      throw ConfigError("switch_to_m1_at requires method gna or agna");
  }
  if (depth > 1 && method != Method::na && !switch_to_m1_at)
    throw ConfigError("depth m > 1 is only available for na, or for gna/agna with switch_to_m1_at");
  if (!(tol > 0.0))
    throw ConfigError("tol must be positive");
  if (max_iter == 0)
    throw ConfigError("max_iter must be positive");
  if (!(divergence_cap > tol))
    throw ConfigError("divergence_cap must exceed tol");
  if (linesearch) {
    if (!open_unit(linesearch->c1))
      throw ConfigError("armijo c1 must lie in (0, 1)");
    if (!open_unit(linesearch->shrink))
      throw ConfigError("armijo shrink must lie in (0, 1)");
    if (linesearch->max_backtracks < 1)
      throw ConfigError("armijo max_backtracks must be at least 1");
  }
  if (fixed_lambda && !(*fixed_lambda >= 0.0 && *fixed_lambda <= 1.0))
    throw ConfigError("fixed_lambda must lie in [0, 1]");
  if (weight) {
    try {
      (void)cholesky(*weight);
    } catch (const std::invalid_argument &e) {
      throw ConfigError(std::string("weight: ") + e.what());
    }
  }
}

StepMetric::StepMetric(const DenseMatrix &weight) : factor_(cholesky(weight)) {}

Vector StepMetric::transform(std::span<const double> v) const
{
  if (!factor_)
    return Vector(v.begin(), v.end());
  const DenseMatrix &l = *factor_;
  const std::size_t n = l.rows();
  Vector out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = j; i < n; ++i)
      s += l(i, j) * v[i];
    out[j] = s;
  }
  return out;
}

double StepMetric::dot(std::span<const double> a, std::span<const double> b) const
{
  if (!factor_)
    return nasolve::dot(a, b);
  return nasolve::dot(transform(a), transform(b));
}

double StepMetric::norm(std::span<const double> v) const
{
  if (!factor_)
    return norm2(v);
  return norm2(transform(v));
}

NewtonStep newton_step(const NonlinearProblem &p, std::span<const double> x)
{
  const Vector f = p.residual(x);
  const DenseMatrix jac = p.jacobian(x);
  Vector w = solve_linear(jac, scaled(f, -1.0));
  return {std::move(w), norm2(f)};
}

double anderson_gamma_1(std::span<const double> w_next, std::span<const double> w_prev,
                        const StepMetric &metric)
{
  const Vector diff = subtract(w_next, w_prev);
  const double diff_norm = metric.norm(diff);
  const double scale = metric.norm(w_next) + metric.norm(w_prev);
  if (diff_norm <= std::numeric_limits<double>::epsilon() * scale)
    return 0.0;
  return metric.dot(diff, w_next) / metric.dot(diff, diff);
}

Vector na_update(std::span<const double> x_k, std::span<const double> x_prev,
                 std::span<const double> w_next, std::span<const double> w_prev, double gamma,
                 double lambda)
{
  const double mix = lambda * gamma;
  Vector out(x_k.size());
  for (std::size_t i = 0; i < x_k.size(); ++i) {
    const double newton = x_k[i] + w_next[i];
    const double newton_prev = x_prev[i] + w_prev[i];
    out[i] = newton - mix * (newton - newton_prev);
  }
  return out;
}

namespace {

void check_history(std::span<const Vector> iterates, std::span<const Vector> steps)
{
  if (iterates.size() != steps.size() || iterates.size() < 2)
    throw std::invalid_argument("na_m_update: need matching histories of length >= 2");
}

} // namespace

Vector na_m_apply(std::span<const Vector> iterates, std::span<const Vector> steps,
                  std::span<const double> gamma)
{
  check_history(iterates, steps);
  const std::size_t last = iterates.size() - 1;
  const std::size_t n = iterates[last].size();
  if (gamma.size() > last)
    throw std::invalid_argument("na_m_apply: more coefficients than history columns");

  Vector out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = iterates[last][i] + steps[last][i];
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    if (gamma[j] == 0.0)
      continue;
    // (E_k + F_k) column j: (x_{k-j} + w_{k+1-j}) - (x_{k-j-1} + w_{k-j})
    const Vector &xa = iterates[last - j];
    const Vector &wa = steps[last - j];
    const Vector &xb = iterates[last - j - 1];
    const Vector &wb = steps[last - j - 1];
    for (std::size_t i = 0; i < n; ++i)
      out[i] -= gamma[j] * ((xa[i] + wa[i]) - (xb[i] + wb[i]));
  }
  return out;
}

DepthMixResult na_m_update(std::span<const Vector> iterates, std::span<const Vector> steps,
                           std::size_t m, const StepMetric &metric)
{
  check_history(iterates, steps);
  if (m < 1)
    throw std::invalid_argument("na_m_update: depth must be at least 1");
  const std::size_t last = iterates.size() - 1;
  const Vector &w = steps[last];
  const std::size_t n = w.size();
  // m_k = min(k, m); a system of dimension n supports at most n columns.
  const std::size_t mk = std::min({last, m, n});

  DenseMatrix f(n, mk);
  for (std::size_t j = 0; j < mk; ++j)
    f.set_column(j, metric.transform(subtract(steps[last - j], steps[last - j - 1])));
  const Vector w_t = metric.transform(w);

  DepthMixResult out;
  out.columns = mk;
  out.gamma = least_squares(f, w_t);
  out.x_next = na_m_apply(iterates, steps, out.gamma);

  const Vector fitted = f.apply(out.gamma);
  const double w_norm = norm2(w_t);
  out.theta = w_norm > 0.0 ? norm2(subtract(w_t, fitted)) / w_norm : 0.0;
  return out;
}

SafeguardDecision safeguard_decision(double gamma, double beta)
{
  if (gamma == 0.0 || gamma >= 1.0)
    return {SafeguardCase::gamma_zero_or_ge_one, 0.0};
  if (std::abs(gamma) / std::abs(1.0 - gamma) > beta) {
    const double sign = gamma > 0.0 ? 1.0 : -1.0;
    return {SafeguardCase::ratio_exceeded, beta / (gamma * (beta + sign))};
  }
  return {SafeguardCase::pass_through, 1.0};
}

namespace {

double step_ratio(std::span<const double> w_next, std::span<const double> w_prev,
                  const StepMetric &metric)
{
  const double prev = metric.norm(w_prev);
  if (!(prev > 0.0))
    throw std::invalid_argument("safeguard: previous step has zero norm");
  return metric.norm(w_next) / prev;
}

} // namespace

SafeguardOutcome gamma_safeguard(std::span<const double> w_next, std::span<const double> w_prev,
                                 double gamma, double r, const StepMetric &metric)
{
  SafeguardOutcome out;
  out.eta = step_ratio(w_next, w_prev, metric);
  out.r_used = r;
  out.beta = r * out.eta;
  out.decision = safeguard_decision(gamma, out.beta);
  return out;
}

SafeguardOutcome adaptive_gamma_safeguard(std::span<const double> w_next,
                                          std::span<const double> w_prev, double gamma,
                                          double r_hat, const StepMetric &metric)
{
  SafeguardOutcome out;
  out.eta = step_ratio(w_next, w_prev, metric);
  out.r_used = std::min(out.eta, r_hat);
  out.beta = out.r_used * out.eta;
  out.decision = safeguard_decision(gamma, out.beta);
  return out;
}

LinesearchResult armijo_backtrack(const NonlinearProblem &p, std::span<const double> x,
                                  std::span<const double> direction, double c1, double shrink,
                                  int max_backtracks)
{
  if (!all_finite(direction) || norm_inf(direction) == 0.0)
    throw std::invalid_argument("armijo_backtrack: direction must be finite and nonzero");
  if (max_backtracks < 1)
    throw std::invalid_argument("armijo_backtrack: max_backtracks must be at least 1");

  const double f0 = norm2(p.residual(x));
  const double merit0 = 0.5 * f0 * f0;
  LinesearchResult out;
  double t = 1.0;
  Vector trial(x.size());
  for (int i = 0; i < max_backtracks; ++i) {
    out.trials = i + 1;
    out.t = t;
    for (std::size_t j = 0; j < x.size(); ++j)
      trial[j] = x[j] + t * direction[j];
    const double ft = norm2(p.residual(trial));
    if (std::isfinite(ft) && 0.5 * ft * ft <= merit0 - c1 * t * f0 * f0) {
      out.accepted = true;
      return out;
    }
    t *= shrink;
  }
  out.accepted = false;
  return out;
}

namespace {

class Solve
{
public:
  Solve(const NonlinearProblem &p, const SolverConfig &cfg)
      : p_(p), cfg_(cfg), metric_(cfg.weight ? StepMetric(*cfg.weight) : StepMetric())
  {
    depth_ = cfg.method == Method::newton ? 0 : cfg.depth;
    if (cfg.method == Method::gna || cfg.method == Method::agna) {
      safeguarding_ = !cfg.switch_to_m1_at && cfg.activation.kind != Activation::Kind::asymptotic;
    }
  }

  ConvergenceReport run(std::span<const double> x0)
  {
    ConvergenceReport report;
    Vector x(x0.begin(), x0.end());

    for (std::size_t k = 0;; ++k) {
      double residual_norm = 0.0;
      if (!all_finite(x)) {
        report.status = SolveStatus::diverged;
        break;
      }
      const Vector f = p_.residual(x);
      residual_norm = norm2(f);
      report.final_residual_norm = residual_norm;
      if (!std::isfinite(residual_norm) || residual_norm >= cfg_.divergence_cap) {
        report.status = SolveStatus::diverged;
        break;
      }
      if (residual_norm <= cfg_.tol) {
        report.status = SolveStatus::converged;
        break;
      }
      if (k >= cfg_.max_iter) {
        report.status = SolveStatus::max_iter;
        break;
      }

      Vector w;
      try {
        w = solve_linear(p_.jacobian(x), scaled(f, -1.0));
      } catch (const SingularMatrix &) {
        report.status = SolveStatus::singular_jacobian;
        break;
      }
      if (!all_finite(w)) {
        report.status = SolveStatus::diverged;
        break;
      }

      IterationRecord rec;
      rec.k = k;
      rec.x = x;
      rec.w = w;
      rec.residual_norm = residual_norm;
      rec.step_norm = metric_.norm(w);
      if (rec.step_norm == 0.0) {
        // The residual is solved to machine level; nothing left to do.
        report.records.push_back(std::move(rec));
        report.status = SolveStatus::converged;
        break;
      }

      Vector candidate = next_iterate(rec, report);
      Vector x_next = apply_linesearch(x, std::move(candidate), rec);

      iterates_.push_back(x);
      steps_.push_back(w);
      while (iterates_.size() > std::max<std::size_t>(depth_, 1) + 1) {
        iterates_.pop_front();
        steps_.pop_front();
      }
      report.records.push_back(std::move(rec));
      x = std::move(x_next);
    }

    report.final_x = x;
    report.iterations = report.records.size();
    return report;
  }

private:
  Vector next_iterate(IterationRecord &rec, ConvergenceReport &report)
  {
    const Vector &x = rec.x;
    const Vector &w = rec.w;
    if (depth_ == 0 || steps_.empty())
      return add(x, w);

    const Vector &x_prev = iterates_.back();
    const Vector &w_prev = steps_.back();
    rec.eta = rec.step_norm / metric_.norm(w_prev);

    if (cfg_.switch_to_m1_at && !switched_ && rec.step_norm < *cfg_.switch_to_m1_at) {
      switched_ = true;
      safeguarding_ = true;
      depth_ = 1;
    }
    const bool safeguarded_method = cfg_.method == Method::gna || cfg_.method == Method::agna;
    if (safeguarded_method && cfg_.activation.kind == Activation::Kind::asymptotic &&
        !cfg_.switch_to_m1_at && rec.step_norm < cfg_.activation.threshold)
      safeguarding_ = true;

    if (depth_ > 1 || cfg_.depth1_via_least_squares) {
      std::vector<Vector> xs(iterates_.begin(), iterates_.end());
      std::vector<Vector> ws(steps_.begin(), steps_.end());
      const std::size_t keep = std::min(depth_, xs.size());
      xs.erase(xs.begin(), xs.end() - static_cast<std::ptrdiff_t>(keep));
      ws.erase(ws.begin(), ws.end() - static_cast<std::ptrdiff_t>(keep));
      xs.push_back(x);
      ws.push_back(w);
      DepthMixResult mix = na_m_update(xs, ws, depth_, metric_);
      rec.gamma = std::move(mix.gamma);
      rec.theta = mix.theta;
      if (depth_ > 1 || !safeguarding_) {
        rec.decision = SafeguardDecision{SafeguardCase::not_applied, 1.0};
        rec.theta_lambda = mix.theta;
        return std::move(mix.x_next);
      }
    } else {
      rec.gamma = {anderson_gamma_1(w, w_prev, metric_)};
      rec.theta = scaled_theta(w, w_prev, rec.gamma[0], 1.0);
    }

    const double gamma = rec.gamma[0];
    double lambda = 1.0;
    if (safeguarding_) {
      const SafeguardOutcome out =
          cfg_.method == Method::agna ? adaptive_gamma_safeguard(w, w_prev, gamma, cfg_.r_hat, metric_)
                                      : gamma_safeguard(w, w_prev, gamma, cfg_.r, metric_);
      rec.decision = out.decision;
      rec.r_used = out.r_used;
      rec.beta = out.beta;
      lambda = out.decision.lambda_value;
      report.r_history.push_back(out.r_used);
    } else {
      rec.decision = SafeguardDecision{SafeguardCase::not_applied, 1.0};
    }
    if (cfg_.fixed_lambda)
      lambda = *cfg_.fixed_lambda;
    rec.lambda = lambda;
    rec.theta_lambda = scaled_theta(w, w_prev, gamma, lambda);
    return na_update(x, x_prev, w, w_prev, gamma, lambda);
  }

  double scaled_theta(const Vector &w, const Vector &w_prev, double gamma, double lambda) const
  {
    const double mix = lambda * gamma;
    Vector v(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      v[i] = w[i] - mix * (w[i] - w_prev[i]);
    return metric_.norm(v) / metric_.norm(w);
  }

  Vector apply_linesearch(const Vector &x, Vector candidate, IterationRecord &rec)
  {
    if (!cfg_.linesearch || !all_finite(candidate))
      return candidate;
    const Vector direction = subtract(candidate, x);
    if (norm_inf(direction) == 0.0)
      return candidate;
    const LinesearchResult ls = armijo_backtrack(p_, x, direction, cfg_.linesearch->c1,
                                                 cfg_.linesearch->shrink,
                                                 cfg_.linesearch->max_backtracks);
    rec.step_length = ls.t;
    rec.linesearch_failed = !ls.accepted;
    if (ls.t == 1.0)
      return candidate;
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = x[i] + ls.t * direction[i];
    return out;
  }

  const NonlinearProblem &p_;
  const SolverConfig &cfg_;
  StepMetric metric_;
  std::size_t depth_ = 0;
  bool safeguarding_ = false;
  bool switched_ = false;
  std::deque<Vector> iterates_;
  std::deque<Vector> steps_;
};

void annotate(ConvergenceReport &report, const GroundTruth &truth)
{
  std::vector<double> norms;
  norms.reserve(report.records.size());
  for (const auto &r : report.records)
    norms.push_back(r.step_norm);
  const auto q = order_estimates(norms);
  for (std::size_t i = 0; i < report.records.size(); ++i)
    report.records[i].q = q[i];
  try {
    report.q_term = estimate_order(norms).q_term;
  } catch (const OrderUndefined &) {
    report.q_term.reset();
  }

  if (truth.root && truth.null_vector && truth.root->size() == report.final_x.size()) {
    report.error_decomposition = decompose_errors(report, truth);
    for (std::size_t i = 1; i < report.records.size(); ++i) {
      if (report.records[i].gamma.empty())
        continue;
      report.records[i].gamma_hat =
          projected_gamma(report.records[i].w, report.records[i - 1].w, *truth.null_vector);
    }
  }
}

} // namespace

ConvergenceReport solve(const NonlinearProblem &p, std::span<const double> x0,
                        const SolverConfig &cfg)
{
  cfg.validate();
  if (x0.size() != p.dimension())
    throw ConfigError("initial iterate has length " + std::to_string(x0.size()) + ", expected " +
                      std::to_string(p.dimension()));
  if (cfg.weight && cfg.weight->rows() != p.dimension())
    throw ConfigError("weight matrix does not match the problem dimension");

  Solve run(p, cfg);
  ConvergenceReport report = run.run(x0);
  annotate(report, p.truth());
  return report;
}

} // namespace nasolve
