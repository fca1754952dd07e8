#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hardylab/comparison.hpp"
#include "hardylab/quadrature.hpp"

namespace hardylab {

enum class JacobianKind { exact_space_form, custom };

// Radial model of a space form around a totally geodesic/umbilical
// submanifold: ambient dimension m, submanifold dimension n, constant
// curvature lambda, scalar Weingarten eigenvalue kappa (0 when totally
// geodesic). Custom models supply their own radial Jacobian with declared
// (trusted, unverified) curvature bounds and a user-asserted horizon.
struct ModelGeometry {
  int m = 3;
  int n = 0;
  double lambda = 0.0;
  double kappa = 0.0;
  JacobianKind kind = JacobianKind::exact_space_form;

  std::function<double(double)> custom_det;
  std::function<double(double)> custom_dlog_det;
  CurvaturePair declared_lower{};
  CurvaturePair declared_upper{};
  ExtReal custom_horizon = ExtReal::infinity();

  CurvaturePair pair() const { return {lambda, kappa}; }
  ExtReal horizon() const;
  void validate() const;
};

// detA(t) = (c_lam - kap s_lam)^n s_lam^{m-n-1} for exact space forms.
double radial_jacobian(const ModelGeometry& geom, double t);

// (d/dt) log detA; equals G_{lambda,kappa} for exact space forms.
double dlog_radial_jacobian(const ModelGeometry& geom, double t);

// log detA, composed in log space (robust against under/overflow of the
// power factors at extreme t).
double log_radial_jacobian(const ModelGeometry& geom, double t);

// Heintze-Karcher bracket: the upper-curvature side (pair `upper`) bounds the
// Jacobian from below, the lower-curvature side from above. The bracket
// contains radial_jacobian(t) whenever lower <= (lambda, kappa) <= upper.
std::pair<double, double> jacobian_bounds(const ModelGeometry& geom,
                                          const CurvaturePair& lower,
                                          const CurvaturePair& upper, double t);

enum class DomainKind { full_space, punctured, tube, hemisphere_boundary, exterior };

struct DomainSpec {
  DomainKind kind = DomainKind::punctured;
  double t_min = 0.0;
  ExtReal t_max = ExtReal::infinity();
  bool one_sided = false;  // hypersurface with a single normal side in Omega

  void validate(const ModelGeometry& geom) const;
};

// Volume of the unit (m-n-1)-sphere fiber, halved for one-sided hypersurface
// domains. vol(Sigma) is never fixed; it cancels in every quotient and is
// carried symbolically.
double transverse_sphere_volume(const ModelGeometry& geom, const DomainSpec& dom);

struct TubeIntegral {
  QuadResult reduced;              // integral of f(t) detA(t) dt over (t_min, t_max)
  double transverse_factor = 1.0;  // vol(S^{m-n-1}) x [1/2 if one-sided]
};

// Reduces the tube integral of a radial function to one dimension. The
// caller's left singular hint describes f alone; the Jacobian's vanishing
// order is added for exact models when the domain starts at the submanifold.
TubeIntegral tube_integral(const ModelGeometry& geom, const DomainSpec& dom,
                           const Integrand& f, const QuadOptions& opts = {});

enum class BoundDirection { upper, lower };

struct CurvatureCondition {
  BoundDirection direction = BoundDirection::upper;
  CurvaturePair pair{};        // model-side bounds (lambda, kappa)
  CurvaturePair comparison{};  // weight-side parameters (Lambda, K)
};

struct ConditionClause {
  std::string id;
  bool pass = false;
  std::string detail;
};

struct ConditionAudit {
  bool pass = false;
  std::vector<ConditionClause> clauses;
  std::vector<std::string> relaxations;  // named relaxations that rescued a clause
};

// Audits the admissibility clauses of the double-curvature hypotheses for the
// given direction; relaxations applicable for n > 0 (and kappa = 0) are
// reported and applied.
ConditionAudit validate_condition(const CurvatureCondition& cond, int m, int n);

}  // namespace hardylab
