#include "hardylab/geometry.hpp"

#include <cmath>
#include <sstream>

namespace hardylab {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

ExtReal ModelGeometry::horizon() const {
  if (kind == JacobianKind::custom) return custom_horizon;
  return t_horizon(n, pair());
}

void ModelGeometry::validate() const {
  if (m < 2 || n < 0 || n > m - 1)
    throw config_error("geometry: need m >= 2 and 0 <= n <= m-1");
  if (kind == JacobianKind::custom && (!custom_det || !custom_dlog_det))
    throw config_error("geometry: custom Jacobian needs detA and its log-derivative");
}

namespace {

double space_form_jacobian(int m, int n, const CurvaturePair& pair, double t) {
  const double s = s_lambda(pair.lambda, t);
  const double c = c_lambda(pair.lambda, t);
  double v = 1.0;
  if (n > 0) v *= std::pow(c - pair.kappa * s, n);
  if (m - n - 1 > 0) v *= std::pow(s, m - n - 1);
  return v;
}

void require_inside(const ModelGeometry& geom, double t) {
  if (!(t > 0.0) || !(ExtReal(t) < geom.horizon()))
    throw std::domain_error("geometry: t outside (0, horizon)");
}

}  // namespace

double radial_jacobian(const ModelGeometry& geom, double t) {
  geom.validate();
  require_inside(geom, t);
  if (geom.kind == JacobianKind::custom) return geom.custom_det(t);
  return space_form_jacobian(geom.m, geom.n, geom.pair(), t);
}

double dlog_radial_jacobian(const ModelGeometry& geom, double t) {
  geom.validate();
  require_inside(geom, t);
  if (geom.kind == JacobianKind::custom) return geom.custom_dlog_det(t);
  return g_value({geom.m, geom.n, geom.pair()}, t);
}

double log_radial_jacobian(const ModelGeometry& geom, double t) {
  geom.validate();
  require_inside(geom, t);
  if (geom.kind == JacobianKind::custom) return std::log(geom.custom_det(t));
  return geom.n * log_c_minus_ks(geom.lambda, geom.kappa, t) +
         (geom.m - geom.n - 1) * log_s_lambda(geom.lambda, t);
}

std::pair<double, double> jacobian_bounds(const ModelGeometry& geom,
                                          const CurvaturePair& lower,
                                          const CurvaturePair& upper, double t) {
  geom.validate();
  require_inside(geom, t);
  if (!(ExtReal(t) < t_horizon(geom.n, lower)) || !(ExtReal(t) < t_horizon(geom.n, upper)))
    throw std::domain_error("jacobian_bounds: t beyond a comparison horizon");
  const double lo = space_form_jacobian(geom.m, geom.n, upper, t);
  const double hi = space_form_jacobian(geom.m, geom.n, lower, t);
  return {lo, hi};
}

void DomainSpec::validate(const ModelGeometry& geom) const {
  geom.validate();
  if (!(ExtReal(t_min) < t_max)) throw config_error("domain: need t_min < t_max");
  if (t_min < 0.0) throw config_error("domain: t_min must be >= 0");
  if (!(t_max <= geom.horizon()))
    throw config_error("domain: t_max exceeds the model horizon");
  if (kind == DomainKind::hemisphere_boundary && geom.n != geom.m - 1)
    throw config_error("domain: hemisphere_boundary requires n = m-1");
  if (one_sided && geom.n != geom.m - 1)
    throw config_error("domain: one_sided only applies to hypersurfaces (n = m-1)");
}

double transverse_sphere_volume(const ModelGeometry& geom, const DomainSpec& dom) {
  const int d = geom.m - geom.n - 1;  // fiber sphere dimension
  const double vol = 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
  return dom.one_sided ? 0.5 * vol : vol;
}

TubeIntegral tube_integral(const ModelGeometry& geom, const DomainSpec& dom,
                           const Integrand& f, const QuadOptions& opts) {
  dom.validate(geom);
  if (!f.f) throw config_error("tube_integral: missing integrand");

  Integrand weighted;
  weighted.f = [&geom, g = f.f](double t) { return g(t) * radial_jacobian(geom, t); };
  weighted.breakpoints = f.breakpoints;
  weighted.singular_right = f.singular_right;
  if (f.singular_left) {
    SingularHint h = *f.singular_left;
    if (dom.t_min == 0.0 && geom.kind == JacobianKind::exact_space_form)
      h.power += static_cast<double>(geom.m - geom.n - 1);
    weighted.singular_left = h;
  }

  TubeIntegral out;
  out.transverse_factor = transverse_sphere_volume(geom, dom);
  out.reduced = integrate(weighted, dom.t_min, dom.t_max, opts);
  if (!out.reduced.converged && out.reduced.evaluations >= opts.max_evals) {
    std::ostringstream os;
    os << "tube_integral: budget exhausted, best estimate " << out.reduced.value
       << " +/- " << out.reduced.abs_error_est;
    throw numerical_error(os.str());
  }
  return out;
}

ConditionAudit validate_condition(const CurvatureCondition& cond, int m, int n) {
  ConditionAudit audit;
  const double lam = cond.pair.lambda, kap = cond.pair.kappa;
  const double Lam = cond.comparison.lambda, K = cond.comparison.kappa;
  auto add = [&audit](std::string id, bool pass, std::string detail) {
    audit.clauses.push_back({std::move(id), pass, std::move(detail)});
  };

  if (cond.direction == BoundDirection::upper) {
    {
      const bool ok = leq(cond.pair, cond.comparison);
      std::ostringstream os;
      os << "(lambda,kappa)=(" << lam << "," << kap << ") <= (Lambda,K)=(" << Lam
         << "," << K << ")";
      add("order", ok, os.str());
    }
    {
      const bool cond_i = Lam <= 0.0 && K <= 0.0;
      const bool cond_ii = Lam <= 0.0 && K >= 0.0 && K * K <= -Lam;
      std::ostringstream os;
      os << (cond_i ? "(i) (Lambda,K) <= (0,0)"
                    : (cond_ii ? "(ii) Lambda <= 0, K >= 0, K^2 <= -Lambda"
                               : "neither (i) nor (ii) holds"));
      add("horizon", cond_i || cond_ii, os.str());
    }
    if (n >= 1 && n <= m - 2)
      add("umbilic-sign", kap >= 0.0, "kappa >= 0 required for 1 <= n <= m-2");
  } else {
    {
      const bool ok = Lam <= lam && K <= std::min(kap, 0.0);
      std::ostringstream os;
      os << "(Lambda,K)=(" << Lam << "," << K << ") <= (lambda,min(kappa,0))=(" << lam
         << "," << std::min(kap, 0.0) << ")";
      add("order", ok, os.str());
    }
    if (lam > 0.0) {
      bool ok = Lam < lam / 4.0;
      std::string detail = "Lambda < lambda/4";
      if (!ok && n > 0 && Lam <= lam / 4.0) {
        ok = true;
        detail = "Lambda <= lambda/4 (relaxation for n > 0)";
        audit.relaxations.push_back("Lambda <= lambda/4 admissible when n > 0");
      }
      if (!ok && n > 0 && kap == 0.0 && Lam < lam) {
        ok = true;
        detail = "Lambda < lambda (relaxation for n > 0, kappa = 0)";
        audit.relaxations.push_back(
            "Lambda < lambda admissible when n > 0 and kappa = 0");
      }
      add("quarter", ok, detail);
    }
    if (n >= 1 && n <= m - 2)
      add("mean-sign", kap <= 0.0, "kappa <= 0 required for 1 <= n <= m-2");
  }

  audit.pass = true;
  for (const auto& c : audit.clauses) audit.pass = audit.pass && c.pass;
  return audit;
}

}  // namespace hardylab
