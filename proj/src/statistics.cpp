#include "lmc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lmc/errors.hpp"
#include "lmc/rng.hpp"

namespace lmc::stats {

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m.n);
    double s2 = 0.0, s4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    m.variance = m.n > 1 ? s2 / static_cast<double>(m.n - 1) : 0.0;
    m.fourth = s4 / static_cast<double>(m.n);
    return m;
}

MomentComparison compare_moments(const std::vector<double>& a, const std::vector<double>& b) {
    const Moments ma = moments(a), mb = moments(b);
    MomentComparison out;
    const double na = static_cast<double>(ma.n), nb = static_cast<double>(mb.n);
    const double se_mean = std::sqrt(ma.variance / na + mb.variance / nb);
    out.mean_z = se_mean > 0.0 ? (ma.mean - mb.mean) / se_mean : 0.0;
    const double va = std::max(0.0, ma.fourth - ma.variance * ma.variance) / na;
    const double vb = std::max(0.0, mb.fourth - mb.variance * mb.variance) / nb;
    const double se_var = std::sqrt(va + vb);
    out.var_z = se_var > 0.0 ? (ma.variance - mb.variance) / se_var : 0.0;
    return out;
}

namespace {

// Sum over unordered pairs of |s_i - s_j| for sorted s.
double pair_sum_sorted(const std::vector<double>& s) {
    double prefix = 0.0, total = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        total += static_cast<double>(j) * s[j] - prefix;
        prefix += s[j];
    }
    return total;
}

double energy_from_sums(double pool, double da, double db, double n, double m) {
    const double cross = pool - da - db;
    return 2.0 * cross / (n * m) - 2.0 * da / (n * n) - 2.0 * db / (m * m);
}

PermutationResult summarize(double observed, std::vector<double> perms) {
    PermutationResult r;
    r.observed = observed;
    const Moments m = moments(perms);
    r.perm_mean = m.mean;
    r.perm_sd = std::sqrt(m.variance);
    std::sort(perms.begin(), perms.end());
    const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(perms.size()))) - 1;
    r.quantile95 = perms[std::min(idx, perms.size() - 1)];
    const auto above = std::count_if(perms.begin(), perms.end(), [&](double p) { return p >= observed; });
    r.p_value = (1.0 + static_cast<double>(above)) / (1.0 + static_cast<double>(perms.size()));
    return r;
}

void require_samples(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw ParameterError("two-sample statistic needs nonempty samples");
}

}  // namespace

double energy_distance(const std::vector<double>& a, const std::vector<double>& b) {
    require_samples(a.size(), b.size());
    std::vector<double> sa = a, sb = b, pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::sort(pool.begin(), pool.end());
    return energy_from_sums(pair_sum_sorted(pool), pair_sum_sorted(sa), pair_sum_sorted(sb),
                            static_cast<double>(a.size()), static_cast<double>(b.size()));
}

double energy_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    require_samples(a.size(), b.size());
    double da = 0.0, db = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) da += (a[i] - a[j]).norm();
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = i + 1; j < b.size(); ++j) db += (b[i] - b[j]).norm();
    for (const auto& p : a)
        for (const auto& q : b) cross += (p - q).norm();
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    return 2.0 * cross / (n * m) - 2.0 * da / (n * n) - 2.0 * db / (m * m);
}

PermutationResult energy_permutation_test(const std::vector<double>& a,
                                          const std::vector<double>& b, int n_perm,
                                          std::uint64_t seed) {
    require_samples(a.size(), b.size());
    const std::size_t n = a.size(), total = a.size() + b.size();
    // Sort the pooled sample once; each permutation only relabels it.
    std::vector<std::pair<double, bool>> pool;
    pool.reserve(total);
    for (double x : a) pool.emplace_back(x, true);
    for (double x : b) pool.emplace_back(x, false);
    std::sort(pool.begin(), pool.end());
    std::vector<double> values(total);
    std::vector<char> labels(total);
    for (std::size_t i = 0; i < total; ++i) {
        values[i] = pool[i].first;
        labels[i] = pool[i].second;
    }
    const double pool_sum = pair_sum_sorted(values);
    const double nn = static_cast<double>(n), mm = static_cast<double>(total - n);

    auto statistic = [&](const std::vector<char>& lab) {
        double pa = 0.0, pb = 0.0, da = 0.0, db = 0.0;
        double ca = 0.0, cb = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            const double x = values[i];
            if (lab[i]) {
                da += ca * x - pa;
                pa += x;
                ca += 1.0;
            } else {
                db += cb * x - pb;
                pb += x;
                cb += 1.0;
            }
        }
        return energy_from_sums(pool_sum, da, db, nn, mm);
    };

    const double observed = statistic(labels);
    Rng rng = make_stream(seed, 0, kAuxStream);
    std::vector<double> perms;
    perms.reserve(static_cast<std::size_t>(n_perm));
    std::vector<char> lab = labels;
    for (int p = 0; p < n_perm; ++p) {
        std::shuffle(lab.begin(), lab.end(), rng);
        perms.push_back(statistic(lab));
    }
    return summarize(observed, std::move(perms));
}

PermutationResult energy_permutation_test(const std::vector<Vec>& a, const std::vector<Vec>& b,
                                          int n_perm, std::uint64_t seed) {
    require_samples(a.size(), b.size());
    const std::size_t n = a.size(), total = a.size() + b.size();
    std::vector<Vec> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    // Packed upper triangle of pooled distances.
    std::vector<double> dist(total * (total - 1) / 2);
    double pool_sum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = i + 1; j < total; ++j) {
            dist[k] = (pool[i] - pool[j]).norm();
            pool_sum += dist[k++];
        }
    const double nn = static_cast<double>(n), mm = static_cast<double>(total - n);
    auto statistic = [&](const std::vector<char>& lab) {
        double da = 0.0, db = 0.0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < total; ++i)
            for (std::size_t j = i + 1; j < total; ++j, ++idx) {
                if (lab[i] && lab[j])
                    da += dist[idx];
                else if (!lab[i] && !lab[j])
                    db += dist[idx];
            }
        return energy_from_sums(pool_sum, da, db, nn, mm);
    };
    std::vector<char> lab(total, 0);
    std::fill(lab.begin(), lab.begin() + static_cast<std::ptrdiff_t>(n), 1);
    const double observed = statistic(lab);
    Rng rng = make_stream(seed, 0, kAuxStream);
    std::vector<double> perms;
    perms.reserve(static_cast<std::size_t>(n_perm));
    for (int p = 0; p < n_perm; ++p) {
        std::shuffle(lab.begin(), lab.end(), rng);
        perms.push_back(statistic(lab));
    }
    return summarize(observed, std::move(perms));
}

Interval wilson(std::size_t k, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    require_samples(a.size(), b.size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double x = std::min(a.front(), b.front());
    double total = 0.0;
    while (i < a.size() || j < b.size()) {
        double next;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            next = a[i];
        else
            next = b[j];
        total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
        x = next;
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
    }
    return total;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("line fit needs two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ParameterError("line fit needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double ss_res = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

}  // namespace lmc::stats
