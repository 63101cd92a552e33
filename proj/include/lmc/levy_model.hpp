#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lmc/linalg.hpp"
#include "lmc/quadrature.hpp"
#include "lmc/rng.hpp"

namespace lmc {

enum class Support { FullSpace, Ball, HalfSlab, Slab };

std::string_view to_string(Support s);
Support parse_support(std::string_view name);

struct MomentIntegrals {
    double small_square = 0.0;   // int_{|z|<=1} |z|^2 nu(dz)
    double big_first = 0.0;      // int_{|z|>1} |z| nu(dz), +inf when divergent
    bool big_first_finite = true;
    double residual = 0.0;
};

struct Jump {
    double time;
    Vec size;
};

double sphere_area(int dim);
// int over the unit sphere of |e_1|^p.
double sphere_abs_moment(int dim, double p);

// nu(dz) = c0 |z|^{-d-alpha} 1_S(z) dz for one of four support sets S.
class LevyModel {
  public:
    LevyModel(int dim, double alpha, double c0, double eta, Support support);

    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    double c0() const { return c0_; }
    double eta() const { return eta_; }
    Support support() const { return support_; }
    bool symmetric() const { return support_ != Support::HalfSlab; }

    // Optional sub-measure nu0 <= nu from which the coupling measure is built.
    void set_coupling_measure(const LevyModel& sub);
    const LevyModel& coupling_measure() const { return sub_ ? *sub_ : *this; }
    bool has_sub_measure() const { return static_cast<bool>(sub_); }

    bool in_support(const Vec& z) const;
    double density(const Vec& z) const;
    // No pole check; caller guarantees z != 0 or accepts +inf.
    double density_raw(const Vec& z) const;
    // Density of the restriction to {|z| > trunc}.
    double density_truncated(const Vec& z, double trunc) const;

    double ray_extent(const Vec& unit_dir) const;
    quad::RayDomain ray_domain() const;
    // Radii along e where A(re)+c meets the boundary of the support (and of
    // the sphere |w| = trunc when trunc > 0).
    void append_support_crossings(const Mat& a, const Vec& c, const Vec& e, double trunc,
                                  std::vector<double>& out) const;

    double tail_mass(double delta) const;                // nu(|z| > delta)
    double small_ball_second_moment(double rho) const;   // int_{|z|<rho} |z|^2 nu
    // int_{|z|<rho} z z^T nu(dz) = s I (s returned); rho <= eta unless FullSpace.
    double small_ball_covariance_scale(double rho) const;

    MomentIntegrals moment_integrals(const quad::Options& opts = {}) const;
    Vec compensator_drift(double trunc) const;

    Vec sample_size(double trunc, Rng& rng) const;
    std::vector<Jump> sample_jumps(double horizon, double trunc, Rng& rng) const;

    std::string describe() const;

  private:
    bool contains(const LevyModel& other) const;

    int dim_;
    double alpha_;
    double c0_;
    double eta_;
    Support support_;
    std::shared_ptr<const LevyModel> sub_;
};

}  // namespace lmc
