#include "hardylab/minimize.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace hardylab {

namespace {

// Graded interior knots: span widths grow by 1/0.7 away from the singular
// left end. Counts on the chain 6 -> 14 -> 30 -> 62 are built by nested
// refinement (every span midpoint plus one extra bisection of the innermost
// span); other counts are graded directly.
std::vector<double> interior_knots(double a, double b, int n_int) {
  auto base = [a, b](int n) {
    std::vector<double> spans(n + 1);
    double w = 1.0;
    for (int j = 0; j <= n; ++j) {
      spans[j] = w;
      w /= 0.7;
    }
    double sum = 0.0;
    for (double s : spans) sum += s;
    std::vector<double> knots;
    double t = a;
    for (int j = 0; j < n; ++j) {
      t += (b - a) * spans[j] / sum;
      knots.push_back(t);
    }
    return knots;
  };
  auto refine = [a](std::vector<double> k, double b_) {
    std::vector<double> out;
    double prev = a;
    for (double x : k) {
      out.push_back(0.5 * (prev + x));
      out.push_back(x);
      prev = x;
    }
    out.push_back(0.5 * (prev + b_));
    // Extra bisection of the innermost span keeps the count at 2n + 2.
    out.insert(out.begin(), 0.5 * (a + out.front()));
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<double> k = base(6);
  if (n_int == 6) return k;
  for (int n = 6; n <= 126; n = 2 * n + 2) {
    if (n == n_int) return k;
    k = refine(std::move(k), b);
    if (static_cast<int>(k.size()) == n_int) return k;
  }
  return base(n_int);
}

// Clamped cubic B-spline basis.
struct SplineBasis {
  std::vector<double> knots;  // length count + 4
  int count = 0;

  static SplineBasis make(double a, double b, const std::vector<double>& interior) {
    SplineBasis s;
    s.knots.assign(4, a);
    s.knots.insert(s.knots.end(), interior.begin(), interior.end());
    s.knots.insert(s.knots.end(), 4, b);
    s.count = static_cast<int>(interior.size()) + 4;
    return s;
  }

  // Index of the knot span containing t (clamped).
  int find_span(double t) const {
    const int n = count - 1;
    if (t >= knots[static_cast<size_t>(n) + 1]) return n;
    if (t <= knots[3]) return 3;
    int lo = 3, hi = n + 1;  // invariant: knots[lo] <= t < knots[hi]
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (t < knots[static_cast<size_t>(mid)]) ? hi = mid : lo = mid;
    }
    return lo;
  }

  // Values and derivatives of the four basis functions active on the span of
  // t; `first` receives the index of the first active function.
  void eval(double t, int& first, double vals[4], double ders[4]) const {
    const int span = find_span(t);
    first = span - 3;
    double left[4], right[4];
    double ndu[4][4];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= 3; ++j) {
      left[j] = t - knots[span + 1 - j];
      right[j] = knots[span + j] - t;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double den = right[r + 1] + left[j - r];
        const double temp = den != 0.0 ? ndu[r][j - 1] / den : 0.0;
        ndu[r][j] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu[j][j] = saved;
    }
    for (int r = 0; r <= 3; ++r) vals[r] = ndu[r][3];
    // First derivative from the degree-2 basis.
    for (int r = 0; r <= 3; ++r) {
      double d = 0.0;
      const int i = first + r;
      const double dl = knots[i + 3] - knots[i];
      const double dr = knots[i + 4] - knots[i + 1];
      if (r >= 1 && dl > 0.0) d += ndu[r - 1][2] / dl;
      if (r <= 2 && dr > 0.0) d -= ndu[r][2] / dr;
      ders[r] = 3.0 * d;
    }
  }

  std::vector<double> greville() const {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
      g[i] = (knots[i + 1] + knots[i + 2] + knots[i + 3]) / 3.0;
    return g;
  }
};

}  // namespace

struct SplineObjective::Impl {
  SplineBasis basis;
  int first_active = 0;  // dropped leading basis functions (Dirichlet at a)
  int active = 0;        // dof
  double a = 0.0, b = 0.0;
  double p = 2.0;
  const ModelGeometry* geom = nullptr;
  DensityPair densities;

  // Fixed quadrature nodes for objective/gradient evaluation: value weights
  // carry exp(log_den + log detA), derivative weights exp(log_num + log detA).
  struct Node {
    double t, w_num, w_den;
    int first;
    double vals[4], ders[4];
  };
  std::vector<Node> nodes;

  double u_at(const Node& nd, const std::vector<double>& x, bool deriv) const {
    double v = 0.0;
    for (int r = 0; r < 4; ++r) {
      const int gi = nd.first + r - first_active;
      if (gi < 0 || gi >= active) continue;
      v += x[static_cast<size_t>(gi)] * (deriv ? nd.ders[r] : nd.vals[r]);
    }
    return v;
  }

  void build_nodes() {
    // 12-point Gauss-Legendre per quarter-span.
    static const double gx[6] = {0.125233408511469, 0.367831498998180,
                                 0.587317954286617, 0.769902674194305,
                                 0.904117256370475, 0.981560634246719};
    static const double gw[6] = {0.249147045813403, 0.233492536538355,
                                 0.203167426723066, 0.160078328543346,
                                 0.106939325995318, 0.047175336386512};
    nodes.clear();
    for (size_t s = 3; s + 4 < basis.knots.size(); ++s) {
      const double lo = basis.knots[s], hi = basis.knots[s + 1];
      if (!(hi > lo)) continue;
      const int sub = 4;
      for (int q = 0; q < sub; ++q) {
        const double x0 = lo + (hi - lo) * q / sub;
        const double x1 = lo + (hi - lo) * (q + 1) / sub;
        const double h = 0.5 * (x1 - x0), c = 0.5 * (x0 + x1);
        for (int k = 0; k < 6; ++k) {
          for (double sgn : {-1.0, 1.0}) {
            Node nd;
            nd.t = c + sgn * h * gx[k];
            const double base = gw[k] * h;
            nd.w_num = base * std::exp(densities.log_num(nd.t) +
                                       log_radial_jacobian(*geom, nd.t));
            nd.w_den = base * std::exp(densities.log_den(nd.t) +
                                       log_radial_jacobian(*geom, nd.t));
            basis.eval(nd.t, nd.first, nd.vals, nd.ders);
            nodes.push_back(nd);
          }
        }
      }
    }
  }

  std::pair<double, double> energies(const std::vector<double>& x) const {
    double num = 0.0, den = 0.0;
    for (const auto& nd : nodes) {
      const double du = u_at(nd, x, true);
      const double u = u_at(nd, x, false);
      if (du != 0.0) num += nd.w_num * std::pow(std::abs(du), p);
      if (u != 0.0) den += nd.w_den * std::pow(std::abs(u), p);
    }
    return {num, den};
  }
};

SplineObjective::SplineObjective(const ModelGeometry& geom, const DensityPair& densities,
                                 double a, double b, int dof,
                                 MinimizeConstraint constraint)
    : impl(new Impl) {
  if (dof < 4) throw config_error("minimize_rayleigh: need dof >= 4");
  const int dropped = constraint == MinimizeConstraint::vanish_both_ends ? 2 : 1;
  const int n_int = dof + dropped - 4;
  if (n_int < 1) throw config_error("minimize_rayleigh: dof too small for the constraint");
  impl->basis = SplineBasis::make(a, b, interior_knots(a, b, n_int));
  impl->first_active = 1;  // always vanish at the singular end a
  impl->active = dof;
  impl->a = a;
  impl->b = b;
  impl->p = densities.p;
  impl->geom = &geom;
  impl->densities = densities;
  // vanish_both_ends drops the trailing function as well; the active window
  // [1, 1 + dof) covers exactly the admissible coefficients.
  const int expected = impl->basis.count - 1 - (dropped - 1);
  if (expected != dof) throw config_error("minimize_rayleigh: dof bookkeeping mismatch");
  impl->build_nodes();
}

SplineObjective::~SplineObjective() { delete impl; }

int SplineObjective::dof() const { return impl->active; }

std::pair<double, double> SplineObjective::energies(const std::vector<double>& x) const {
  return impl->energies(x);
}

double SplineObjective::quotient(const std::vector<double>& x) const {
  auto [num, den] = impl->energies(x);
  if (!(den > 0.0)) throw config_error("minimize_rayleigh: vanishing denominator");
  return num / den;
}

std::vector<double> SplineObjective::gradient(const std::vector<double>& x) const {
  const double p = impl->p;
  auto [num, den] = impl->energies(x);
  std::vector<double> gn(x.size(), 0.0), gd(x.size(), 0.0);
  for (const auto& nd : impl->nodes) {
    const double du = impl->u_at(nd, x, true);
    const double u = impl->u_at(nd, x, false);
    const double fn =
        du != 0.0 ? p * nd.w_num * std::pow(std::abs(du), p - 2.0) * du : 0.0;
    const double fd = u != 0.0 ? p * nd.w_den * std::pow(std::abs(u), p - 2.0) * u : 0.0;
    for (int r = 0; r < 4; ++r) {
      const int gi = nd.first + r - impl->first_active;
      if (gi < 0 || gi >= impl->active) continue;
      gn[static_cast<size_t>(gi)] += fn * nd.ders[r];
      gd[static_cast<size_t>(gi)] += fd * nd.vals[r];
    }
  }
  const double R = num / den;
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) g[i] = (gn[i] - R * gd[i]) / den;
  return g;
}

namespace {

// Assembles the p = 2 stiffness/mass matrices entrywise with the adaptive
// engine (breakpoints at the knots inside each overlap).
void assemble_p2(const SplineObjective::Impl& im, Eigen::MatrixXd& A, Eigen::MatrixXd& B,
                 const QuadOptions& opts) {
  const int dof = im.active;
  A.setZero(dof, dof);
  B.setZero(dof, dof);
  const auto& knots = im.basis.knots;
  for (int i = 0; i < dof; ++i) {
    const int bi = i + im.first_active;
    for (int j = i; j < std::min(dof, i + 4); ++j) {
      const int bj = j + im.first_active;
      const double lo = std::max(knots[static_cast<size_t>(bj)], im.a);
      const double hi =
          std::min(knots[static_cast<size_t>(bi) + 4], im.b);
      if (!(lo < hi)) continue;
      Integrand fa, fb;
      fa.f = [&im, bi, bj](double t) {
        int first;
        double v[4], d[4];
        im.basis.eval(t, first, v, d);
        const int ri = bi - first, rj = bj - first;
        if (ri < 0 || ri > 3 || rj < 0 || rj > 3) return 0.0;
        return d[ri] * d[rj] *
               std::exp(im.densities.log_num(t) + log_radial_jacobian(*im.geom, t));
      };
      fb.f = [&im, bi, bj](double t) {
        int first;
        double v[4], d[4];
        im.basis.eval(t, first, v, d);
        const int ri = bi - first, rj = bj - first;
        if (ri < 0 || ri > 3 || rj < 0 || rj > 3) return 0.0;
        return v[ri] * v[rj] *
               std::exp(im.densities.log_den(t) + log_radial_jacobian(*im.geom, t));
      };
      for (double k : knots)
        if (k > lo && k < hi) {
          fa.breakpoints.push_back(k);
          fb.breakpoints.push_back(k);
        }
      QuadOptions o = opts;
      o.rtol = std::max(opts.rtol, 1e-10);
      A(i, j) = A(j, i) = integrate(fa, lo, hi, o).value;
      B(i, j) = B(j, i) = integrate(fb, lo, hi, o).value;
    }
  }
}

}  // namespace

MinimizationResult minimize_rayleigh(const ModelGeometry& geom, const DomainSpec& dom,
                                     const DensityPair& densities, double a, double b,
                                     int dof, MinimizeConstraint constraint,
                                     const QuadOptions& opts,
                                     const RadialTestFunction* warm_restart) {
  dom.validate(geom);
  if (!(a >= dom.t_min && ExtReal(b) <= dom.t_max && a < b))
    throw config_error("minimize_rayleigh: window [a, b] must sit inside the domain");

  SplineObjective obj(geom, densities, a, b, dof, constraint);
  auto& im = *obj.impl;
  const double p = densities.p;

  MinimizationResult res;
  res.dof = dof;

  // p = 2 eigenproblem by inverse iteration on the assembled pencil.
  Eigen::MatrixXd A, B;
  assemble_p2(im, A, B, opts);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(dof);
  x.normalize();
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw numerical_error("minimize_rayleigh: stiffness matrix not positive definite");
  double theta = 0.0;
  int it = 0;
  for (; it < 400; ++it) {
    Eigen::VectorXd y = llt.solve(B * x);
    y.normalize();
    x = y;
    theta = x.dot(A * x) / x.dot(B * x);
    const double resid = (A * x - theta * (B * x)).norm() / (B * x).norm();
    res.eigen_residual = resid;
    if (resid <= 1e-10) break;
    if (it == 150 || it == 250) {
      // Rayleigh-shift refinement when plain iteration crawls.
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(A - theta * B);
      Eigen::VectorXd z = lu.solve(B * x);
      if (z.allFinite() && z.norm() > 0.0) {
        z.normalize();
        x = z;
      }
    }
  }
  res.iterations = it;

  std::vector<double> coeff(x.data(), x.data() + dof);
  double quotient = theta;

  if (p != 2.0) {
    // Descent from the p = 2 minimizer with backtracking; restart from the
    // projected almost-extremal profile if the line search stalls.
    auto run_descent = [&](std::vector<double> start, double& out_q,
                           std::vector<double>& out_x) {
      std::vector<double> xv = std::move(start);
      double q = obj.quotient(xv);
      int stalls = 0;
      for (int k = 0; k < 600 && stalls < 3; ++k) {
        std::vector<double> g = obj.gradient(xv);
        double gnorm2 = 0.0;
        for (double gi : g) gnorm2 += gi * gi;
        if (gnorm2 < 1e-24) break;
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
          std::vector<double> trial(xv.size());
          for (size_t i = 0; i < xv.size(); ++i) trial[i] = xv[i] - step * g[i];
          double qt;
          try {
            qt = obj.quotient(trial);
          } catch (const config_error&) {
            step *= 0.5;
            continue;
          }
          if (qt < q - 1e-4 * step * gnorm2) {
            xv = std::move(trial);
            q = qt;
            moved = true;
            break;
          }
          step *= 0.5;
        }
        if (!moved) ++stalls;
        // Renormalize against drift (the quotient is 0-homogeneous).
        double nrm = 0.0;
        for (double c : xv) nrm += c * c;
        nrm = std::sqrt(nrm);
        if (nrm > 0.0)
          for (double& c : xv) c /= nrm;
      }
      out_q = q;
      out_x = std::move(xv);
    };

    double q1;
    std::vector<double> x1;
    run_descent(coeff, q1, x1);
    quotient = q1;
    coeff = x1;

    // Stalled barely below the p = 2 quotient: retry from the projected
    // almost-extremal profile (Greville quasi-interpolation).
    if (warm_restart && quotient > theta * (1.0 - 1e-6)) {
      std::vector<double> proj(static_cast<size_t>(dof), 0.0);
      const auto g = im.basis.greville();
      for (int i = 0; i < dof; ++i) {
        const double t =
            std::clamp(g[static_cast<size_t>(i + im.first_active)], a, b);
        proj[static_cast<size_t>(i)] = warm_restart->value(t);
      }
      double q2;
      std::vector<double> x2;
      run_descent(proj, q2, x2);
      if (q2 < quotient) {
        quotient = q2;
        coeff = x2;
      }
    }
  }

  res.min_quotient = quotient;
  res.coefficients = coeff;
  res.converged = res.eigen_residual <= 1e-8 || p != 2.0;

  // Mass concentration: denominator share of the innermost decile.
  {
    auto u_val = [&](double t) {
      int first;
      double v[4], d[4];
      im.basis.eval(t, first, v, d);
      double s = 0.0;
      for (int r = 0; r < 4; ++r) {
        const int gi = first + r - im.first_active;
        if (gi >= 0 && gi < im.active) s += coeff[static_cast<size_t>(gi)] * v[r];
      }
      return s;
    };
    Integrand den;
    den.f = [&](double t) {
      const double u = u_val(t);
      if (u == 0.0) return 0.0;
      return std::exp(p * std::log(std::abs(u)) + densities.log_den(t) +
                      log_radial_jacobian(geom, t));
    };
    for (double k : im.basis.knots)
      if (k > a && k < b) den.breakpoints.push_back(k);
    const double split = a + 0.1 * (b - a);
    Integrand den_inner = den;
    den_inner.breakpoints.clear();
    for (double k : im.basis.knots)
      if (k > a && k < split) den_inner.breakpoints.push_back(k);
    const double total = integrate(den, a, b, opts).value;
    const double inner = integrate(den_inner, a, split, opts).value;
    res.mass_fraction = total > 0.0 ? inner / total : 0.0;
  }
  return res;
}

}  // namespace hardylab
