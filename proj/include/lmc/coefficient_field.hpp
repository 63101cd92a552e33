#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmc/linalg.hpp"

namespace lmc {

struct DissipativityProfile {
    double k1 = 0.0;
    double k2 = 1.0;
    double l0 = 0.0;
    double beta = 1.0;
};

class CoefficientField {
  public:
    using VecFn = std::function<Vec(const Vec&)>;
    using MatFn = std::function<Mat(const Vec&)>;

    CoefficientField(int dim, VecFn drift, MatFn diffusion, MatFn diffusion_inverse,
                     double lambda_nd, double lip_sigma, bool diagonal, bool constant_diffusion,
                     std::string name = "custom");

    int dim() const { return dim_; }
    Vec drift(const Vec& x) const { return drift_(x); }
    Mat diffusion(const Vec& x) const { return diffusion_(x); }
    Mat diffusion_inverse(const Vec& x) const { return inverse_(x); }
    double lambda_nd() const { return lambda_; }
    double lip_sigma() const { return lip_; }
    bool diagonal() const { return diagonal_; }
    bool constant_diffusion() const { return constant_; }
    const std::string& name() const { return name_; }

    // Profile implied by the drift preset, when one is known.
    const std::optional<DissipativityProfile>& profile() const { return profile_; }
    void set_profile(const DissipativityProfile& p) { profile_ = p; }

  private:
    int dim_;
    VecFn drift_;
    MatFn diffusion_;
    MatFn inverse_;
    double lambda_;
    double lip_;
    bool diagonal_;
    bool constant_;
    std::string name_;
    std::optional<DissipativityProfile> profile_;
};

struct PresetSpec {
    std::string name;
    std::map<std::string, double> params;
    double get(const std::string& key, double fallback) const;
};

CoefficientField make_coefficients(int dim, const PresetSpec& drift, const PresetSpec& diffusion);

struct PresetInfo {
    std::string name;
    std::string params;
    std::string note;
};
std::vector<PresetInfo> drift_catalog();
std::vector<PresetInfo> diffusion_catalog();

struct StructureReport {
    double max_upper = 0.0;       // max |sigma(x) xi| / |xi|
    double max_inverse = 0.0;     // max |sigma(x)^{-1} xi| / |xi|
    double inverse_residual = 0.0;
    double max_lipschitz = 0.0;   // max ||sigma(x)-sigma(y)||_HS / |x-y|
    bool nondegenerate_ok = true;
    bool inverse_ok = true;
    bool lipschitz_ok = true;
    std::vector<std::string> violations;
    bool ok() const { return nondegenerate_ok && inverse_ok && lipschitz_ok; }
};

using PointPair = std::pair<Vec, Vec>;

StructureReport verify_structure(const CoefficientField& cf, const std::vector<Vec>& grid,
                                 const std::vector<PointPair>& pairs);

struct DissipativityReport {
    double near_violation = -1e300;   // max over |x-y| < l0 of lhs - K1 |x-y|^beta
    double far_violation = -1e300;    // max over |x-y| >= l0 of lhs + K2 |x-y|
    std::size_t near_pairs = 0;
    std::size_t far_pairs = 0;
    bool ok() const { return near_violation <= 1e-12 && far_violation <= 1e-12; }
};

DissipativityReport dissipativity_check(const CoefficientField& cf, const DissipativityProfile& prof,
                                        const std::vector<PointPair>& pairs);

// Default sampling grids: Sobol points in [-half_width, half_width]^d and
// pairs with log-spaced distances in [min_dist, max_dist].
std::vector<Vec> sobol_grid(int dim, std::size_t n, double half_width);
std::vector<PointPair> distance_pairs(int dim, std::size_t n, double half_width, double min_dist,
                                      double max_dist, std::uint64_t seed);

}  // namespace lmc
