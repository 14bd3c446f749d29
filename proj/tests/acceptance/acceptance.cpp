// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "distmin/error.hpp"
#include "distmin/experiment/runner.hpp"
#include "distmin/model/objective.hpp"
#include "distmin/model/scoring.hpp"
#include "distmin/opt/first_order.hpp"
#include "distmin/opt/lbfgs.hpp"
#include "distmin/opt/line_search.hpp"
#include "distmin/opt/owlqn.hpp"
#include "distmin/ot/ot_loss.hpp"
#include "support/dense_model.hpp"
#include "support/dense_ot.hpp"
#include "support/finite_difference.hpp"
#include "support/functions.hpp"
#include "support/random.hpp"
#include "support/sinkhorn.hpp"

using namespace distmin;
using namespace distmin::testing;
using namespace distmin::testing::dense;
using experiment::ExperimentKind;
using experiment::RunReport;
using model::ComputationalGrid;
using model::ExampleBatch;
using model::LossSpec;
using vec::DistVector;
using vec::VectorLayout;

namespace {

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

class Outcome {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failed_ == 0; }
  std::string describe() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    if (failed_ > 0) {
      out += format("%s%zu failed check(s):", out.empty() ? "" : "; ", failed_);
      for (const auto& f : failures_) out += " [" + f + "]";
    }
    return out;
  }

 private:
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> widen(const std::vector<Scalar>& v) { return {v.begin(), v.end()}; }

double max_rel(const std::vector<double>& got, const std::vector<double>& want) {
  return relative_error(std::vector<Scalar>(got.begin(), got.end()), std::vector<Scalar>(want.begin(), want.end()));
}

// Shared between the experiment criteria and the determinism rerun.
struct Runs {
  std::optional<std::vector<opt::IterationRecord>> sinkhorn_lbfgs;
  std::optional<RunReport> regression;
  std::optional<RunReport> multiclass_same;
  std::optional<RunReport> multiclass_distinct;
  std::optional<RunReport> transport;
};

// ---------------------------------------------------------------- 1

void gradient_suite(Outcome& o) {
  std::mt19937_64 rng(2024);
  double worst = 0;
  std::size_t suites = 0;
  const auto record = [&](const GradientCheck& fd, const std::string& what) {
    worst = std::max(worst, fd.max_relative_error);
    o.expect(fd.coordinates >= 20, what + format(": only %zu coordinates", fd.coordinates));
    o.expect(fd.max_relative_error < 1e-5, what + format(": relative error %.3g", fd.max_relative_error));
  };

  struct Case {
    model::ModelKind kind;
    LossSpec loss;
    std::size_t rows;
    Target target;
  };
  using model::LossKind;
  using model::ModelKind;
  const std::vector<Case> cases{
      {ModelKind::Linear, {LossKind::L2}, 1, Target::Real},
      {ModelKind::Linear, {LossKind::Quantile, 0.1}, 1, Target::Real},
      {ModelKind::Linear, {LossKind::Quantile, 0.5}, 1, Target::Real},
      {ModelKind::Linear, {LossKind::Quantile, 0.9}, 1, Target::Real},
      {ModelKind::Linear, {LossKind::Logistic}, 1, Target::Sign},
      {ModelKind::Linear, {LossKind::Softmax}, 10, Target::Class},
      {ModelKind::FactorizationMachine, {LossKind::L2}, 3, Target::Real},
      {ModelKind::FactorizationMachine, {LossKind::Quantile, 0.1}, 3, Target::Real},
      {ModelKind::FactorizationMachine, {LossKind::Quantile, 0.9}, 2, Target::Real},
      {ModelKind::FactorizationMachine, {LossKind::Logistic}, 2, Target::Sign},
  };
  for (const auto& c : cases) {
    const std::string name = to_string(c.kind) + "/" + to_string(c.loss.kind) +
                             (c.loss.kind == LossKind::Quantile ? format("%.1f", c.loss.tau) : "");
    for (int instance = 0; instance < 5; ++instance) {
      const std::size_t dim = uniform_size(rng, 30, 80);
      const std::size_t eb = uniform_size(rng, 4, 25);
      const auto ex = random_examples(rng, 40, dim, 8, c.target, c.rows);
      const ExampleBatch batch(ex, uniform_size(rng, 1, 5));
      const VectorLayout layout{dim, eb, c.rows};
      const ComputationalGrid grid(batch, layout);
      const auto xs = uniform_vector(rng, dim * c.rows);
      const auto g = model::loss_and_backprop(c.kind, c.loss, DistVector::from_stacked(xs, c.rows, eb), grid)
                         .grad.to_dense();
      auto value = [&](const std::vector<Scalar>& v) {
        return model::loss_and_backprop(c.kind, c.loss, DistVector::from_stacked(v, c.rows, eb), grid, false).value;
      };
      record(check_gradient(value, xs, g, pick_coordinates(rng, g, 24), 1e-5), name);
    }
    ++suites;
  }

  // FM ranking: dimension 10 (users 0-3, items 4-9), three factor rows.
  model::UniformItemSampler sampler(4, 6);
  for (int instance = 0; instance < 5; ++instance) {
    const std::size_t m = 3;
    const ExampleBatch pos(ranking_positives(rng, 6), 2);
    model::RankingGrids grids{std::make_shared<ComputationalGrid>(pos, VectorLayout{10, 3, m}), {}};
    const std::size_t nb = 1 + static_cast<std::size_t>(instance % 2);
    for (std::size_t b = 0; b < nb; ++b) {
      grids.negatives.push_back(std::make_shared<ComputationalGrid>(model::sample_negatives(pos, sampler, 2, 7, b),
                                                                    VectorLayout{10, 3, m}));
    }
    const auto xs = uniform_vector(rng, 10 * m);
    const auto g = model::ranking_loss_and_backprop(model::ModelKind::FactorizationMachine,
                                                    DistVector::from_stacked(xs, m, 3), grids)
                       .grad.to_dense();
    auto value = [&](const std::vector<Scalar>& v) {
      return model::ranking_loss_and_backprop(model::ModelKind::FactorizationMachine,
                                              DistVector::from_stacked(v, m, 3), grids, false)
          .value;
    };
    record(check_gradient(value, xs, g, pick_coordinates(rng, g, 24), 1e-5), "fm/ranking");
  }
  ++suites;

  // OT dual on generated clouds, eps = 0.1.
  for (std::uint64_t instance = 0; instance < 5; ++instance) {
    const auto clouds = experiment::generate_ot({24, 10, 4, 100 + instance});
    const auto grid = ot::build_cost_grid(clouds.source, clouds.target, 6);
    const ot::OtConfig cfg{0.1};
    const auto p = uniform_vector(rng, 48, -0.3, 0.3);
    const auto g = ot::ot_evaluate(DistVector::from_dense(p, 6), grid, cfg).grad.to_dense();
    auto value = [&](const std::vector<Scalar>& q) {
      return ot::ot_evaluate(DistVector::from_dense(q, 6), grid, cfg, false).value;
    };
    record(check_gradient(value, p, g, pick_coordinates(rng, g, 24), 1e-6), "ot/dual");
  }
  ++suites;
  o.note(format("%zu losses x 5 instances, worst relative error %.2e", suites, worst));
}

// ---------------------------------------------------------------- 2

void dense_oracle_suite(Outcome& o) {
  std::mt19937_64 rng(77);
  double worst = 0;
  const auto expect_close = [&](double err, const std::string& what) {
    worst = std::max(worst, err);
    o.expect(err < 1e-10, what + format(": %.3g", err));
  };

  // Vector algebra, flat and stacked.
  for (auto [rows, length, eb] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 10000, 768},
                                  {4, 2500, 300}}) {
    const auto a = uniform_vector(rng, rows * length);
    auto b = uniform_vector(rng, rows * length, 0.5, 2);
    for (std::size_t i = 0; i < b.size(); i += 2) b[i] = -b[i];
    const auto A = DistVector::from_stacked(a, rows, eb);
    const auto B = DistVector::from_stacked(b, rows, eb);
    const double s = 0.37;
    std::vector<double> sum(a.size()), diff(a.size()), prod(a.size()), quot(a.size()), axpy(a.size()), scaled(a.size());
    double dot = 0, n1 = 0, n2 = 0, n3 = 0, total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum[i] = a[i] + b[i];
      diff[i] = a[i] - b[i];
      prod[i] = a[i] * b[i];
      quot[i] = a[i] / b[i];
      axpy[i] = a[i] + s * b[i];
      scaled[i] = s * a[i];
      dot += a[i] * b[i];
      n1 += std::abs(a[i]);
      n2 += a[i] * a[i];
      n3 += std::pow(std::abs(a[i]), 3);
      total += a[i];
    }
    const std::string tag = rows == 1 ? "vector" : "stacked";
    expect_close(max_rel(widen((A + B).to_dense()), sum), tag + " +");
    expect_close(max_rel(widen((A - B).to_dense()), diff), tag + " -");
    expect_close(max_rel(widen((A * B).to_dense()), prod), tag + " *");
    expect_close(max_rel(widen((A / B).to_dense()), quot), tag + " /");
    expect_close(max_rel(widen(A.add_scaled(B, s).to_dense()), axpy), tag + " axpy");
    expect_close(max_rel(widen((A * static_cast<Scalar>(s)).to_dense()), scaled), tag + " scale");
    expect_close(relative_error(A.dot(B), dot), tag + " dot");
    expect_close(relative_error(A.norm(1), n1), tag + " norm1");
    expect_close(relative_error(A.norm(2), std::sqrt(n2)), tag + " norm2");
    expect_close(relative_error(A.norm(3), std::cbrt(n3)), tag + " norm3");
    expect_close(relative_error(A.sum(), total), tag + " sum");
  }

  // Linear and FM scores against per-example transcriptions.
  {
    const std::size_t dim = 10000, rows = 3, eb = 700;
    const auto ex = random_examples(rng, 300, dim, 40);
    const ExampleBatch batch(ex, 6);
    const auto xs = uniform_vector(rng, dim * rows);
    const ComputationalGrid grid(batch, VectorLayout{dim, eb, rows});
    std::map<std::int64_t, std::vector<Scalar>> got;
    for (auto& [id, e] : model::linear_score(DistVector::from_stacked(xs, rows, eb), grid).collect()) got[id] = e.scores;
    std::vector<double> g, w;
    for (const auto& e : ex) {
      for (std::size_t r = 0; r < rows; ++r) {
        g.push_back(got[e.id].at(r));
        w.push_back(dense_linear(e, xs, dim, r));
      }
    }
    expect_close(max_rel(g, w), "linear scores");
  }
  {
    const std::size_t dim = 2000, m = 4, eb = 150;
    const auto ex = random_examples(rng, 200, dim, 15);
    const ExampleBatch batch(ex, 5);
    const auto xs = uniform_vector(rng, dim * m);
    const ComputationalGrid grid(batch, VectorLayout{dim, eb, m});
    std::map<std::int64_t, Scalar> got;
    for (auto& [id, e] : model::fm_score(DistVector::from_stacked(xs, m, eb), grid).collect()) got[id] = e.scores.at(0);
    std::vector<double> g, w;
    for (const auto& e : ex) {
      g.push_back(got[e.id]);
      w.push_back(dense_fm(e, xs, dim, m));
    }
    expect_close(max_rel(g, w), "fm scores (pair sum)");
  }

  // Loss value and gradient against dense objectives.
  for (auto [kind, loss, rows, target] :
       {std::tuple{model::ModelKind::Linear, model::LossKind::Softmax, std::size_t{10}, Target::Class},
        std::tuple{model::ModelKind::Linear, model::LossKind::L2, std::size_t{1}, Target::Real},
        std::tuple{model::ModelKind::FactorizationMachine, model::LossKind::Logistic, std::size_t{4}, Target::Sign}}) {
    const std::size_t dim = 1000, eb = 90;
    const auto ex = random_examples(rng, 150, dim, 20, target, rows);
    const ExampleBatch batch(ex, 4);
    const auto xs = uniform_vector(rng, dim * rows, -0.3, 0.3);
    const ComputationalGrid grid(batch, VectorLayout{dim, eb, rows});
    const auto got = model::loss_and_backprop(kind, {loss}, DistVector::from_stacked(xs, rows, eb), grid);
    const auto want = dense_objective(kind, loss, 0.5, ex, xs, dim, rows);
    const std::string tag = to_string(kind) + "/" + to_string(loss);
    expect_close(relative_error(got.value, want.value), tag + " value");
    expect_close(max_rel(widen(got.grad.to_dense()), want.grad), tag + " gradient");
  }

  // LBFGS two-loop against the explicit BFGS inverse.
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t dim = uniform_size(rng, 5, 60);
    const Matrix a = random_spd(rng, dim, 0.5, 5);
    opt::LbfgsHistory history;
    history.memory = 10;
    std::vector<std::vector<double>> s, y;
    while (s.size() < 6) {
      auto sv = as_double(uniform_vector(rng, dim));
      auto yv = mat_vec(a, sv);
      if (!history.push(distribute(sv, 7), distribute(yv, 7))) continue;
      s.push_back(sv);
      y.push_back(yv);
    }
    const auto g = as_double(uniform_vector(rng, dim));
    const auto d = as_double(opt::lbfgs_direction(history, distribute(g, 7)).to_dense());
    auto hg = mat_vec(bfgs_inverse(s, y, dim), g);
    for (auto& v : hg) v = -v;
    expect_close(max_rel(d, hg), "lbfgs two-loop");
  }

  // OT loss and gradient.
  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    const auto clouds = experiment::generate_ot({60, 10, 4, 40 + trial});
    const auto grid = ot::build_cost_grid(clouds.source, clouds.target, 20);
    const auto p = uniform_vector(rng, 120, -0.3, 0.3);
    const auto got = ot::ot_evaluate(DistVector::from_dense(p, 20), grid, {0.1});
    const auto want = dense_ot(grid.to_dense(), p, 60, 60, 0.1);
    expect_close(relative_error(got.value, want.value), "ot value");
    expect_close(max_rel(widen(got.grad.to_dense()), want.grad), "ot gradient");
  }
  o.note(format("worst relative deviation %.2e", worst));
}

// ---------------------------------------------------------------- 3

std::vector<opt::IterationRecord> sinkhorn_comparison(Outcome* o) {
  const std::size_t n = 100;
  const auto clouds = experiment::generate_ot({n, 10, 4, 1});
  const ot::OtConfig cfg{0.1};
  const auto grid = ot::build_cost_grid(clouds.source, clouds.target, 20);
  ot::OtObjective f(grid, cfg);
  opt::MinimizerConfig mc;
  mc.grad_tolerance = 1e-6;
  mc.max_iterations = 1000;
  std::vector<opt::IterationRecord> records;
  const auto state =
      opt::minimize(f, DistVector::zeros(f.layout()), mc, [&](const opt::IterationRecord& r) { records.push_back(r); });
  if (!o) return records;

  const auto oracle = sinkhorn(grid.to_dense(), n, n, cfg.epsilon);
  o->expect(oracle.marginal_error < 1e-10, format("oracle marginal error %.3g", oracle.marginal_error));
  const double gnorm = state.grad.norm();
  o->expect(gnorm < 1e-6, format("gradient norm %.3g", gnorm));
  const auto m = ot::plan_marginals(state.x, grid, cfg);
  double err = 0;
  for (double r : m.rows) err = std::max(err, std::abs(r - 1.0 / n));
  for (double c : m.cols) err = std::max(err, std::abs(c - 1.0 / n));
  o->expect(err < 1e-6, format("marginal error %.3g", err));
  const double dual_err = relative_error(-state.value, oracle.dual);
  o->expect(dual_err < 1e-6, format("dual relative error %.3g", dual_err));
  o->note(format("%zu LBFGS iterations, |grad| %.2e, marginals %.2e, dual rel. error %.2e (Sinkhorn %zu sweeps, "
                 "marginals %.1e)",
                 state.iter, gnorm, err, dual_err, oracle.iterations, oracle.marginal_error));
  return records;
}

// ---------------------------------------------------------------- 4-6

RunReport regression_run() {
  auto spec = experiment::default_spec(ExperimentKind::L2Regression);
  spec.num_batches = 1;
  return experiment::run_experiment(spec).report;
}

void regression_overfit(Outcome& o, Runs& runs) {
  runs.regression = regression_run();
  const auto& r = *runs.regression;
  std::optional<std::size_t> hit;
  for (const auto& rec : r.records) {
    if (rec.value < 1e-8) {
      hit = rec.iter;
      break;
    }
  }
  o.expect(hit.has_value() && *hit <= 15, "loss never below 1e-8 within 15 iterations");
  o.note(format("loss %.3g after %zu iterations; first below 1e-8 at iteration %s", r.final_loss(), r.iterations(),
                hit ? std::to_string(*hit).c_str() : "-"));
}

RunReport multiclass_run(bool distinct) {
  auto spec = experiment::default_spec(ExperimentKind::Multiclass);
  spec.step_size_batch_distinct = distinct;
  return experiment::run_experiment(spec).report;
}

void multiclass_passes(Outcome& o, Runs& runs) {
  runs.multiclass_same = multiclass_run(false);
  runs.multiclass_distinct = multiclass_run(true);
  for (const auto* r : {&*runs.multiclass_same, &*runs.multiclass_distinct}) {
    const std::string tag = r == &*runs.multiclass_same ? "distinct off" : "distinct on";
    const std::size_t batches = static_cast<std::size_t>(r->metrics.at("batches"));
    o.expect(r->records.size() == 11, tag + format(": %zu records", r->records.size()));
    // Mean loss over each full pass of consecutive iterations 1..10.
    std::vector<double> means;
    for (std::size_t start = 1; start + batches <= r->records.size(); start += batches) {
      double s = 0;
      for (std::size_t i = start; i < start + batches; ++i) s += r->records[i].value;
      means.push_back(s / static_cast<double>(batches));
    }
    bool monotone = !means.empty() && means.front() < r->records.front().value;
    for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] < means[i - 1];
    o.expect(monotone, tag + ": pass means not decreasing");
    const double holdout = r->metrics.at("holdout_logloss");
    const double bayes = r->metrics.at("bayes_logloss");
    o.expect(holdout <= 1.25 * bayes, tag + format(": holdout %.4f vs Bayes %.4f", holdout, bayes));
    std::string passes;
    for (double m : means) passes += format("%s%.4f", passes.empty() ? "" : ">", m);
    o.note(tag + format(": passes %s, holdout %.4f = %.1f%% above Bayes %.4f", passes.c_str(), holdout,
                        100 * (holdout / bayes - 1), bayes));
  }
  const double on = runs.multiclass_distinct->metrics.at("holdout_logloss");
  const double off = runs.multiclass_same->metrics.at("holdout_logloss");
  o.note(format("distinct on/off holdout ratio %.3f (reported only)", on / off));
}

RunReport transport_run() {
  return experiment::run_experiment(experiment::default_spec(ExperimentKind::OptimalTransport)).report;
}

void transport_convergence(Outcome& o, Runs& runs) {
  runs.transport = transport_run();
  const auto& r = *runs.transport;
  o.expect(r.reason.kind == opt::ConvergenceReason::Kind::GradNormBelow, "stopped with " + r.reason.describe());
  o.expect(r.final_grad_norm() < 0.5e-4, format("gradient norm %.3g", r.final_grad_norm()));
  o.expect(r.iterations() <= 20, format("%zu iterations", r.iterations()));
  o.note(format("|grad| %.2e after %zu iterations, dual %.10f, %g saturated exponentials", r.final_grad_norm(),
                r.iterations(), -r.final_loss(), r.metrics.at("saturated_exponentials")));
}

// ---------------------------------------------------------------- 7

void optimizer_properties(Outcome& o) {
  std::mt19937_64 rng(71);
  using namespace distmin::opt;
  std::size_t worst_excess = 0;
  for (std::size_t dim = 1; dim <= 10; ++dim) {
    for (int trial = 0; trial < 10; ++trial) {
      Quadratic f(random_spd(rng, dim, 1, 10), as_double(uniform_vector(rng, dim)));
      const auto x0 = distribute(as_double(uniform_vector(rng, dim, -2, 2)), 3);
      MinimizerConfig cfg;
      cfg.wolfe.c1 = 1e-5;
      cfg.wolfe.c2 = 1e-4;
      cfg.grad_tolerance = 1e-6 * f.compute(x0).grad.norm(2);
      const auto s = minimize(f, x0, cfg);
      o.expect(s.convergence->kind == ConvergenceReason::Kind::GradNormBelow && s.iter <= dim + 1,
               format("lbfgs quadratic d=%zu took %zu iterations", dim, s.iter));
      if (s.iter > dim + 1) worst_excess = std::max(worst_excess, s.iter - dim - 1);
    }
  }

  // OWLQN against the soft threshold on separable quadratics.
  std::size_t zeros = 0;
  double owlqn_err = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t dim = 20;
    const auto a = as_double(uniform_vector(rng, dim, 0.5, 3));
    const auto c = as_double(uniform_vector(rng, dim, -2, 2));
    const double alpha = 0.7;
    Separable f(a, c, 6);
    MinimizerConfig cfg;
    cfg.optimizer = OptimizerKind::Owlqn;
    cfg.l1 = alpha;
    cfg.grad_tolerance = 1e-10;
    cfg.max_iterations = 500;
    const auto x = minimize(f, distribute(as_double(uniform_vector(rng, dim)), 6), cfg).x.to_dense();
    for (std::size_t i = 0; i < dim; ++i) {
      const double want = soft_threshold(c[i], alpha / a[i]);
      if (want == 0.0) {
        ++zeros;
        o.expect(x[i] == 0.0, format("owlqn coordinate %zu not exactly zero (%.3g)", i, x[i]));
      } else {
        owlqn_err = std::max(owlqn_err, std::abs(x[i] - want));
      }
    }
  }
  o.expect(owlqn_err < 1e-8, format("owlqn deviates from soft threshold by %.3g", owlqn_err));

  // OWLQN with l1 = 0 against LBFGS.
  for (auto ls : {LineSearchKind::StrongWolfe, LineSearchKind::Backtracking}) {
    Quadratic f1(random_spd(rng, 15, 0.5, 80), as_double(uniform_vector(rng, 15)));
    Quadratic f2(f1.a(), f1.b());
    const auto x0 = distribute(as_double(uniform_vector(rng, 15)), 4);
    MinimizerConfig cfg;
    cfg.line_search = ls;
    cfg.max_iterations = 30;
    cfg.grad_tolerance = 1e-12;
    std::vector<IterationRecord> r1, r2;
    const auto s1 = minimize(f1, x0, cfg, [&](const IterationRecord& r) { r1.push_back(r); });
    cfg.optimizer = OptimizerKind::Owlqn;
    const auto s2 = minimize(f2, x0, cfg, [&](const IterationRecord& r) { r2.push_back(r); });
    bool same = r1.size() == r2.size() && bit_equal(s1.x.to_dense(), s2.x.to_dense());
    for (std::size_t i = 0; same && i < r1.size(); ++i) {
      same = std::memcmp(&r1[i].value, &r2[i].value, sizeof(Scalar)) == 0 &&
             std::memcmp(&r1[i].grad_norm, &r2[i].grad_norm, sizeof(Scalar)) == 0;
    }
    o.expect(same, "owlqn(l1=0) differs from lbfgs with " + to_string(ls));
  }

  // Adagrad against a scalar transcription of its update.
  for (auto [l1, l2, memory] : {std::tuple{0.0, 0.0, 10}, std::tuple{0.05, 0.1, 7}, std::tuple{0.3, 0.0, 60}}) {
    const std::vector<double> as{2.0, 0.5, 1.0}, cs{1.5, -3.0, 0.1}, x0{0.2, 0.4, -0.7};
    Separable f(as, cs, 2);
    MinimizerConfig cfg;
    cfg.optimizer = OptimizerKind::Adagrad;
    cfg.learning_rate = 0.3;
    cfg.l1 = l1;
    cfg.l2 = l2;
    cfg.adagrad_memory = static_cast<std::size_t>(memory);
    cfg.max_iterations = 50;
    cfg.grad_tolerance = 1e-300;
    const auto got = minimize(f, distribute(x0, 2), cfg).x.to_dense();
    for (std::size_t i = 0; i < 3; ++i) {
      const double eta = 0.3, delta = 1e-8;
      auto grad = [&](double x) { return as[i] * (x - cs[i]); };
      double x = x0[i], h = 0, g = grad(x);
      for (std::size_t t = 1; t <= 50; ++t) {
        const double sigma = std::sqrt((h + g * g) + delta);
        const double tentative = (sigma * x - g * eta) / (sigma + eta * l2);
        const double thr = (eta * l1) / sigma;
        const double xn = std::abs(tentative) < thr ? 0.0 : tentative - thr * (tentative > 0 ? 1.0 : -1.0);
        const double gn = grad(xn);
        if (t <= static_cast<std::size_t>(memory)) {
          h = t <= 1 ? 0.0 : h + g * g;
        } else {
          h = h * (1 - 1.0 / memory) + (gn * gn) * (1.0 / memory);
        }
        x = xn;
        g = gn;
      }
      o.expect(got[i] == x, format("adagrad coordinate %zu: %.17g vs %.17g", i, got[i], x));
    }
  }

  // Line-search inequalities on random convex instances.
  std::size_t wolfe_checked = 0, armijo_checked = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t dim = uniform_size(rng, 1, 6);
    std::unique_ptr<DiffFunction> f;
    if (inst % 2 == 0) {
      f = std::make_unique<Quadratic>(random_spd(rng, dim, 0.1, 20), as_double(uniform_vector(rng, dim)));
    } else {
      f = std::make_unique<SmoothAbs>(as_double(uniform_vector(rng, dim, 1e-3, 1)), 2);
    }
    const auto x = distribute(as_double(uniform_vector(rng, dim, -5, 5)), 2);
    const auto e = f->compute(x);
    if (e.grad.norm(2) == 0) continue;
    const auto d = -(e.grad * static_cast<Scalar>(std::uniform_real_distribution<double>(0.01, 10)(rng)));
    const Scalar slope0 = e.grad.dot(d);
    const Scalar t0 = std::uniform_real_distribution<double>(0.01, 10)(rng);
    const WolfeConfig wc;
    const auto r = strong_wolfe_search(*f, x, d, e.value, slope0, t0, wc);
    const auto at = f->compute(x.add_scaled(d, r.step));
    o.expect(at.value <= e.value + wc.c1 * r.step * slope0, format("wolfe sufficient decrease, instance %d", inst));
    o.expect(std::abs(at.grad.dot(d)) <= wc.c2 * std::abs(slope0), format("wolfe curvature, instance %d", inst));
    ++wolfe_checked;

    const BacktrackingConfig bc;
    const auto rb = backtracking_search(*f, x, d, e.value, slope0, t0, bc);
    o.expect(f->compute(x.add_scaled(d, rb.step)).value <= e.value + bc.c1 * rb.step * slope0,
             format("armijo, instance %d", inst));
    if (rb.step < t0) {
      const Scalar larger = rb.step / bc.shrink;
      o.expect(f->compute(x.add_scaled(d, larger)).value > e.value + bc.c1 * larger * slope0,
               format("backtracking skipped an acceptable step, instance %d", inst));
    }
    ++armijo_checked;
  }
  o.note(format("lbfgs d+1 bound on 100 quadratics, %zu exact owlqn zeros (max error %.1e), owlqn(0)=lbfgs bitwise, "
                "adagrad 50 steps exact, %zu Wolfe + %zu Armijo searches",
                zeros, owlqn_err, wolfe_checked, armijo_checked));
}

// ---------------------------------------------------------------- 8

bool same_columns(const std::vector<opt::IterationRecord>& a, const std::vector<opt::IterationRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i].value, &b[i].value, sizeof(Scalar)) != 0) return false;
    if (std::memcmp(&a[i].grad_norm, &b[i].grad_norm, sizeof(Scalar)) != 0) return false;
    if (a[i].batch_index != b[i].batch_index) return false;
  }
  return true;
}

void determinism(Outcome& o, Runs& runs) {
  if (!runs.sinkhorn_lbfgs) runs.sinkhorn_lbfgs = sinkhorn_comparison(nullptr);
  if (!runs.regression) runs.regression = regression_run();
  if (!runs.multiclass_distinct) runs.multiclass_distinct = multiclass_run(true);
  if (!runs.transport) runs.transport = transport_run();
  std::size_t rows = 0;
  const auto compare = [&](const std::vector<opt::IterationRecord>& a, const std::vector<opt::IterationRecord>& b,
                           const char* what) {
    o.expect(same_columns(a, b), std::string(what) + " differs between runs");
    rows += a.size();
  };
  compare(*runs.sinkhorn_lbfgs, sinkhorn_comparison(nullptr), "OT 100x100");
  compare(runs.regression->records, regression_run().records, "regression");
  compare(runs.multiclass_distinct->records, multiclass_run(true).records, "multiclass");
  compare(runs.transport->records, transport_run().records, "OT 500x500");
  o.note(format("4 experiment runs repeated, %zu report rows bit-identical", rows));
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<void(Outcome&, Runs&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "gradient correctness (central differences)", 120, [](Outcome& o, Runs&) { gradient_suite(o); }},
      {2, "distributed vs dense oracles", 120, [](Outcome& o, Runs&) { dense_oracle_suite(o); }},
      {3, "OT vs Sinkhorn oracle (100x100, eps 0.1)", 60,
       [](Outcome& o, Runs& r) { r.sinkhorn_lbfgs = sinkhorn_comparison(&o); }},
      {4, "regression single-batch over-fit", 300, regression_overfit},
      {5, "multiclass, step-size batch distinct on/off", 900, multiclass_passes},
      {6, "OT 500x500 gradient norm below 0.5e-4", 120, transport_convergence},
      {7, "optimizer property suites", 120, [](Outcome& o, Runs&) { optimizer_properties(o); }},
      {8, "determinism of report columns", 0, determinism},
  };

  Runs runs;
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o, runs);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (c.budget_seconds > 0) o.expect(secs < c.budget_seconds, format("took %.1fs", secs));
    const bool ok = o.passed();
    failed += !ok;
    std::printf("%s [%d] %s (%.1fs): %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs, o.describe().c_str());
    std::fflush(stdout);
  }
  return failed;
}
