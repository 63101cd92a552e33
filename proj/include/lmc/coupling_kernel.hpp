#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lmc/coefficient_field.hpp"
#include "lmc/levy_model.hpp"
#include "lmc/quadrature.hpp"

namespace lmc {

Vec clipped_difference(const Vec& x, const Vec& y, double kappa);

// Psi(z) = m z + v and its inverse m_inv z + v_inv, frozen at one pair (x, y).
struct AffineMap {
    Mat m;
    Vec v;
    Mat m_inv;
    Vec v_inv;
    double det = 1.0;          // |det m|
    double distance = 0.0;     // |x - y|
    bool identity = true;

    Vec psi(const Vec& z) const { return identity ? z : Vec(m * z + v); }
    Vec psi_inverse(const Vec& z) const { return identity ? z : Vec(m_inv * z + v_inv); }
};

enum class Branch { Coalesce, Reflect, Synchronize };

struct ThinningDecision {
    Branch branch = Branch::Synchronize;
    Vec y_jump;
};

class CouplingKernel {
  public:
    CouplingKernel(const LevyModel& levy, const CoefficientField& coeff, double kappa);

    const LevyModel& levy() const { return levy_; }
    const CoefficientField& coeff() const { return coeff_; }
    double kappa() const { return kappa_; }
    int dim() const { return levy_.dim(); }

    AffineMap affine(const Vec& x, const Vec& y) const;
    Vec psi(const Vec& x, const Vec& y, const Vec& z) const;
    Vec psi_inverse(const Vec& x, const Vec& y, const Vec& z) const;

    // Densities of mu_Psi (inverse=false) and mu_{Psi^{-1}} built from the
    // coupling measure restricted to {|z| > trunc}.
    double mu_density(const AffineMap& a, const Vec& z, bool inverse, double trunc = 0.0) const;

    // Thinning ratios against nu restricted to {|z| > trunc}.
    std::pair<double, double> rho(const Vec& x, const Vec& y, const Vec& z) const;
    std::pair<double, double> rho(const AffineMap& a, const Vec& z, double trunc) const;

    ThinningDecision thin(const AffineMap& a, const Mat& sigma_y, const Vec& z, double u,
                          double trunc) const;

    // Radii along e where mu densities are not smooth.
    void append_mu_breaks(const AffineMap& a, bool inverse, const Vec& e, double trunc,
                          std::vector<double>& out) const;
    quad::RayDomain mu_domain() const { return levy_.coupling_measure().ray_domain(); }

    quad::Result mu_mass(const Vec& x, const Vec& y, double trunc = 0.0,
                         const quad::Options& opts = {}) const;
    quad::Result mu_inverse_mass(const Vec& x, const Vec& y, double trunc = 0.0,
                                 const quad::Options& opts = {}) const;
    // int_{|z|<=radius} |z| (mu_Psi + mu_{Psi^{-1}})(dz)
    quad::Result mu_first_moment(const Vec& x, const Vec& y, double radius,
                                 const quad::Options& opts = {}) const;

    // max relative gap between int h(Psi z) mu_Psi(dz) and int h(z) mu_{Psi^{-1}}(dz).
    double pushforward_identity_check(const Vec& x, const Vec& y,
                                      const std::vector<std::function<double(const Vec&)>>& hs,
                                      const quad::Options& opts = {}) const;

  private:
    quad::Result integrate_mu(const AffineMap& a, bool inverse,
                              const std::function<double(const Vec&, double)>& weight,
                              double trunc, quad::Options opts) const;

    const LevyModel& levy_;
    const CoefficientField& coeff_;
    double kappa_;
};

}  // namespace lmc
