#include "distmin/opt/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "distmin/error.hpp"

namespace distmin::opt {

namespace {

struct Probe {
  Scalar t = 0;
  Scalar phi = 0;
  Scalar dphi = 0;
};

void require_descent(Scalar slope0, const char* who) {
  if (!(slope0 < 0)) {
    throw InvalidArgument(std::string(who) + ": direction is not a descent direction (slope " + std::to_string(slope0) +
                          ")");
  }
}

// Minimizer of the cubic matching value and slope at a and b; NaN when the
// cubic has no real minimizer.
Scalar cubic_minimizer(const Probe& a, const Probe& b) {
  const Scalar d1 = a.dphi + b.dphi - 3 * (a.phi - b.phi) / (a.t - b.t);
  const Scalar disc = d1 * d1 - a.dphi * b.dphi;
  if (!(disc >= 0)) return std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar d2 = std::copysign(std::sqrt(disc), b.t - a.t);
  const Scalar denom = b.dphi - a.dphi + 2 * d2;
  if (denom == 0) return std::numeric_limits<Scalar>::quiet_NaN();
  return b.t - (b.t - a.t) * (b.dphi + d2 - d1) / denom;
}

class WolfeSearch {
 public:
  WolfeSearch(DiffFunction& f, const DistVector& x, const DistVector& d, Scalar value0, Scalar slope0,
              const WolfeConfig& cfg)
      : f_(f), x_(x), d_(d), phi0_(value0), slope0_(slope0), cfg_(cfg) {}

  LineSearchResult run(Scalar t) {
    Probe prev{0, phi0_, slope0_};
    for (std::size_t i = 0;; ++i) {
      Probe cur = probe(t);
      if (armijo_fails(cur) || (i > 0 && cur.phi >= prev.phi)) return zoom(prev, cur);
      if (curvature_holds(cur)) return done(cur);
      if (cur.dphi >= 0) return zoom(cur, prev);
      Scalar next = cubic_minimizer(prev, cur);
      if (!std::isfinite(next) || next <= cur.t) next = 4 * cur.t;
      t = std::clamp(next, 2 * cur.t, 4 * cur.t);
      prev = cur;
    }
  }

 private:
  Probe probe(Scalar t) {
    if (evals_ >= cfg_.max_evals) {
      throw LineSearchFailed("strong Wolfe search exhausted " + std::to_string(cfg_.max_evals) + " evaluations");
    }
    ++evals_;
    auto e = f_.compute(x_.add_scaled(d_, t));
    Probe p{t, e.value, e.grad.dot(d_)};
    if (!std::isfinite(p.phi) || !std::isfinite(p.dphi)) {
      p.phi = std::numeric_limits<Scalar>::infinity();
      p.dphi = std::numeric_limits<Scalar>::quiet_NaN();
    }
    return p;
  }

  bool armijo_fails(const Probe& p) const { return !(p.phi <= phi0_ + cfg_.c1 * p.t * slope0_); }
  bool curvature_holds(const Probe& p) const { return std::abs(p.dphi) <= -cfg_.c2 * slope0_; }

  LineSearchResult done(const Probe& p) const { return {p.t, p.phi, evals_}; }

  LineSearchResult zoom(Probe lo, Probe hi) {
    for (;;) {
      const Scalar a = std::min(lo.t, hi.t);
      const Scalar b = std::max(lo.t, hi.t);
      if (b - a <= std::numeric_limits<Scalar>::epsilon() * b) {
        throw LineSearchFailed("strong Wolfe bracket collapsed at step " + std::to_string(lo.t));
      }
      // Interpolated steps are kept away from the bracket ends; steep walls
      // otherwise pin the cubic to one end and the bracket stops shrinking.
      const Scalar margin = 0.1 * (b - a);
      Scalar t = cubic_minimizer(lo, hi);
      t = std::isfinite(t) ? std::clamp(t, a + margin, b - margin) : (a + b) / 2;
      Probe cur = probe(t);
      if (armijo_fails(cur) || cur.phi >= lo.phi) {
        hi = cur;
      } else {
        if (curvature_holds(cur)) return done(cur);
        if (cur.dphi * (hi.t - lo.t) >= 0) hi = lo;
        lo = cur;
      }
    }
  }

  DiffFunction& f_;
  const DistVector& x_;
  const DistVector& d_;
  Scalar phi0_;
  Scalar slope0_;
  WolfeConfig cfg_;
  std::size_t evals_ = 0;
};

}  // namespace

LineSearchResult strong_wolfe_search(DiffFunction& f, const DistVector& x, const DistVector& d, Scalar value0,
                                     Scalar slope0, Scalar initial_step, const WolfeConfig& cfg) {
  require_descent(slope0, "strong Wolfe search");
  if (!(cfg.c1 > 0 && cfg.c1 < cfg.c2 && cfg.c2 < 1)) throw InvalidArgument("Wolfe constants need 0 < c1 < c2 < 1");
  if (!(initial_step > 0)) throw InvalidArgument("initial step must be positive");
  return WolfeSearch(f, x, d, value0, slope0, cfg).run(initial_step);
}

LineSearchResult backtracking_search(DiffFunction& f, const DistVector& x, const DistVector& d, Scalar value0,
                                     Scalar slope0, Scalar initial_step, const BacktrackingConfig& cfg) {
  require_descent(slope0, "backtracking search");
  if (!(cfg.shrink > 0 && cfg.shrink < 1)) throw InvalidArgument("backtracking shrink factor must lie in (0, 1)");
  if (!(initial_step > 0)) throw InvalidArgument("initial step must be positive");
  Scalar t = initial_step;
  for (std::size_t evals = 1; evals <= cfg.max_evals; ++evals) {
    const Scalar phi = f.compute_value(x.add_scaled(d, t));
    if (phi <= value0 + cfg.c1 * t * slope0) return {t, phi, evals};
    t *= cfg.shrink;
  }
  throw LineSearchFailed("backtracking search exhausted " + std::to_string(cfg.max_evals) + " evaluations");
}

}  // namespace distmin::opt
