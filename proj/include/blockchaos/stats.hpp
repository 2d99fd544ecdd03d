// Copyright 2026 The blockchaos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Level statistics: unfolded nearest-neighbour spacings, the spacing-ratio
// statistic r, density histograms, and Dyson-Mehta Delta_3 rigidity.
//
// Eigenphases live on a circle, so their spacings include the wrap-around gap
// and Delta_3 windows are taken on the periodically extended staircase.
// Synthetic line spectra (Poisson/GOE/GUE references) omit the wrap term.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blockchaos/errors.hpp"
#include "blockchaos/floquet.hpp"
#include "blockchaos/linalg.hpp"

namespace blockchaos {

enum class Topology { circular, line };

/// Spacings below this fraction of the mean spacing are degeneracies.
inline constexpr double kDegenerateFraction = 1e-12;

struct SpacingEnsemble {
    std::vector<double> spacings;  // all > 0, mean 1
    std::vector<std::string> source;
    std::size_t excluded_degenerate = 0;
};

namespace detail {

/// Raw spacings of sorted levels; circular adds the gap back to the first level.
inline std::vector<double> raw_spacings(std::span<const double> sorted, Topology topo, double period = 2.0 * kPi) {
    std::vector<double> s;
    if (sorted.size() < 2) return s;
    s.reserve(sorted.size());
    for (std::size_t k = 1; k < sorted.size(); ++k) s.push_back(sorted[k] - sorted[k - 1]);
    if (topo == Topology::circular) s.push_back(sorted.front() + period - sorted.back());
    return s;
}

/// Drops degenerate spacings in place; returns how many were dropped.
inline std::size_t drop_degenerate(std::vector<double> &s) {
    if (s.empty()) return 0;
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    const std::size_t before = s.size();
    if (!(mean > 0.0)) {
        s.clear();
        return before;
    }
    const double cut = kDegenerateFraction * mean;
    std::erase_if(s, [cut](double x) { return !(x >= cut); });
    return before - s.size();
}

inline std::vector<double> sorted_copy(std::span<const double> levels) {
    std::vector<double> v(levels.begin(), levels.end());
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace detail

/// Circular spacings of an eigenphase set (wrap-around gap included),
/// divided by their mean.
inline SpacingEnsemble unfold_circular(const EigenphaseSet &set) {
    if (set.phases.size() < 2) throw ValidationError("unfold_circular: need at least 2 phases");
    SpacingEnsemble out;
    out.spacings = detail::raw_spacings(detail::sorted_copy(set.phases), Topology::circular);
    out.excluded_degenerate = detail::drop_degenerate(out.spacings);
    if (out.spacings.empty()) throw ValidationError("unfold_circular: spectrum is fully degenerate");
    const double mean = std::accumulate(out.spacings.begin(), out.spacings.end(), 0.0) / static_cast<double>(out.spacings.size());
    for (double &x : out.spacings) x /= mean;
    return out;
}

/// Consecutive spacings of a line spectrum divided by their mean.
inline SpacingEnsemble unfold_line(std::span<const double> levels) {
    if (levels.size() < 2) throw ValidationError("unfold_line: need at least 2 levels");
    SpacingEnsemble out;
    out.spacings = detail::raw_spacings(detail::sorted_copy(levels), Topology::line);
    out.excluded_degenerate = detail::drop_degenerate(out.spacings);
    if (out.spacings.empty()) throw ValidationError("unfold_line: spectrum is fully degenerate");
    const double mean = std::accumulate(out.spacings.begin(), out.spacings.end(), 0.0) / static_cast<double>(out.spacings.size());
    for (double &x : out.spacings) x /= mean;
    return out;
}

/// Sorted levels shifted to start at 0 and scaled to unit mean spacing.
inline std::vector<double> unfold_levels(std::span<const double> levels) {
    if (levels.size() < 2) throw ValidationError("unfold_levels: need at least 2 levels");
    std::vector<double> v = detail::sorted_copy(levels);
    const double scale = static_cast<double>(v.size() - 1) / (v.back() - v.front());
    const double first = v.front();
    for (double &x : v) x = (x - first) * scale;
    return v;
}

inline SpacingEnsemble pool(std::span<const SpacingEnsemble> parts) {
    SpacingEnsemble out;
    for (const auto &p : parts) {
        out.spacings.insert(out.spacings.end(), p.spacings.begin(), p.spacings.end());
        out.source.insert(out.source.end(), p.source.begin(), p.source.end());
        out.excluded_degenerate += p.excluded_degenerate;
    }
    return out;
}

struct RStatistic {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::size_t excluded_degenerate = 0;
};

/// min/max ratios of consecutive spacings (degenerate spacings removed
/// first). Circular sequences contribute one ratio per spacing, line
/// sequences one fewer.
inline std::vector<double> spacing_ratios(std::vector<double> spacings, Topology topo, std::size_t *excluded = nullptr) {
    const std::size_t dropped = detail::drop_degenerate(spacings);
    if (excluded) *excluded += dropped;
    std::vector<double> r;
    const std::size_t n = spacings.size();
    if (n < 2) return r;
    const std::size_t pairs = topo == Topology::circular ? n : n - 1;
    r.reserve(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
        const double a = spacings[k], b = spacings[(k + 1) % n];
        r.push_back(std::min(a, b) / std::max(a, b));
    }
    return r;
}

/// Mean and standard error of pooled ratios. Summed in sorted order so
/// the result does not depend on the order sets were pooled in.
inline RStatistic summarize_ratios(std::vector<double> ratios, std::size_t excluded) {
    RStatistic out;
    out.samples = ratios.size();
    out.excluded_degenerate = excluded;
    if (ratios.empty()) throw ValidationError("r_statistic: no spacing pairs");
    std::sort(ratios.begin(), ratios.end());
    const double n = static_cast<double>(ratios.size());
    out.mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / n;
    if (ratios.size() > 1) {
        double ss = 0.0;
        for (double x : ratios) ss += (x - out.mean) * (x - out.mean);
        out.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

/// Pooled r over eigenphase sets; pairs never straddle two sets.
inline RStatistic r_statistic(std::span<const EigenphaseSet> sets) {
    std::vector<double> all;
    std::size_t excluded = 0;
    for (const auto &set : sets) {
        if (set.phases.size() < 3) throw ValidationError("r_statistic: each set needs at least 3 phases");
        const auto r = spacing_ratios(detail::raw_spacings(detail::sorted_copy(set.phases), Topology::circular),
                                      Topology::circular, &excluded);
        all.insert(all.end(), r.begin(), r.end());
    }
    return summarize_ratios(std::move(all), excluded);
}

inline RStatistic r_statistic(const EigenphaseSet &set) { return r_statistic(std::span(&set, 1)); }

/// Pooled r over line spectra (levels in any order).
inline RStatistic r_statistic_line(std::span<const std::vector<double>> spectra) {
    std::vector<double> all;
    std::size_t excluded = 0;
    for (const auto &levels : spectra) {
        if (levels.size() < 3) throw ValidationError("r_statistic: each set needs at least 3 levels");
        const auto r = spacing_ratios(detail::raw_spacings(detail::sorted_copy(levels), Topology::line), Topology::line, &excluded);
        all.insert(all.end(), r.begin(), r.end());
    }
    return summarize_ratios(std::move(all), excluded);
}

/// r from a spacing sequence taken as given.
inline RStatistic r_statistic_spacings(std::span<const double> spacings, Topology topo) {
    std::size_t excluded = 0;
    auto r = spacing_ratios(std::vector<double>(spacings.begin(), spacings.end()), topo, &excluded);
    return summarize_ratios(std::move(r), excluded);
}

struct HistogramSpec {
    int bins = 50;
    double lo = 0.0;
    double hi = 4.0;
};

struct Histogram {
    std::vector<double> edges;      // bins + 1
    std::vector<double> densities;  // bins
    std::vector<std::size_t> counts;
    std::size_t overflow = 0;  // samples >= hi, counted into the last bin
    std::size_t total = 0;
};

/// Normalised spacing density. Samples beyond `hi` are folded into the last
/// bin so the density integrates to 1 over [lo, hi].
inline Histogram nns_histogram(const SpacingEnsemble &e, HistogramSpec spec = {}) {
    if (e.spacings.empty()) throw ValidationError("nns_histogram: empty ensemble");
    if (spec.bins < 1 || !(spec.hi > spec.lo)) throw ValidationError("nns_histogram: bad bin layout");
    Histogram h;
    const double width = (spec.hi - spec.lo) / spec.bins;
    h.edges.resize(static_cast<std::size_t>(spec.bins) + 1);
    for (int k = 0; k <= spec.bins; ++k) h.edges[k] = spec.lo + k * width;
    h.counts.assign(static_cast<std::size_t>(spec.bins), 0);
    for (double s : e.spacings) {
        if (s < spec.lo) throw ValidationError("nns_histogram: spacing below histogram range");
        auto k = static_cast<std::ptrdiff_t>(std::floor((s - spec.lo) / width));
        if (k >= spec.bins) {
            ++h.overflow;
            k = spec.bins - 1;
        }
        ++h.counts[static_cast<std::size_t>(k)];
    }
    h.total = e.spacings.size();
    h.densities.resize(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        h.densities[k] = static_cast<double>(h.counts[k]) / (static_cast<double>(h.total) * width);
    }
    return h;
}

struct Delta3Options {
    double stride_fraction = 0.25;  // window stride as a fraction of L
};

struct Delta3Point {
    double L = 0.0;
    double value = 0.0;
    std::size_t windows = 0;
};

namespace detail {

/// min_{A,B} (1/L) int_a^{a+L} (N(s) - A s - B)^2 ds for the levels in
/// [a, a+L] (sorted range [first, last)).
inline double delta3_window(const double *first, const double *last, double a, double L) {
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    double idx = 0.0;
    for (const double *p = first; p != last; ++p) {
        const double y = *p - a;
        idx += 1.0;
        i0 += L - y;
        i1 += 0.5 * (L * L - y * y);
        i2 += (2.0 * idx - 1.0) * (L - y);
    }
    // Normal equations for the straight-line fit over [0, L].
    const double m0 = L, m1 = 0.5 * L * L, m2 = L * L * L / 3.0;
    const double det = m2 * m0 - m1 * m1;
    const double A = (i1 * m0 - i0 * m1) / det;
    const double B = (m2 * i0 - m1 * i1) / det;
    return std::max(0.0, (i2 - A * i1 - B * i0) / L);
}

struct Delta3Accumulator {
    double sum = 0.0;
    std::size_t windows = 0;
};

/// Circular spectrum of n unfolded levels with period n, levels sorted in [0, n).
inline void delta3_circular_accumulate(const std::vector<double> &x, double L, double stride, Delta3Accumulator &acc) {
    const auto n = static_cast<double>(x.size());
    if (L > n) throw ValidationError("delta3: window length exceeds spectrum span");
    std::vector<double> ext;
    ext.reserve(2 * x.size());
    for (double v : x) ext.push_back(v);
    for (double v : x) ext.push_back(v + n);
    for (std::size_t k = 0;; ++k) {
        const double a = x.front() + static_cast<double>(k) * stride;
        if (a >= x.front() + n) break;
        const auto lo = std::lower_bound(ext.begin(), ext.end(), a);
        const auto hi = std::upper_bound(lo, ext.end(), a + L);
        acc.sum += delta3_window(ext.data() + (lo - ext.begin()), ext.data() + (hi - ext.begin()), a, L);
        ++acc.windows;
    }
}

inline void delta3_line_accumulate(const std::vector<double> &x, double L, double stride, Delta3Accumulator &acc) {
    if (L > x.back() - x.front()) throw ValidationError("delta3: window length exceeds spectrum span");
    for (std::size_t k = 0;; ++k) {
        const double a = x.front() + static_cast<double>(k) * stride;
        if (a + L > x.back()) break;
        const auto lo = std::lower_bound(x.begin(), x.end(), a);
        const auto hi = std::upper_bound(lo, x.end(), a + L);
        acc.sum += delta3_window(x.data() + (lo - x.begin()), x.data() + (hi - x.begin()), a, L);
        ++acc.windows;
    }
}

inline std::vector<double> unfold_phases_circular(const EigenphaseSet &set) {
    std::vector<double> x = sorted_copy(set.phases);
    const double n = static_cast<double>(x.size());
    const double first = x.front();
    for (double &v : x) v = (v - first) * n / (2.0 * kPi);
    return x;
}

}  // namespace detail

/// Delta_3(L) averaged over all windows of all sets. Each eigenphase set is
/// unfolded to unit mean spacing on a circle of circumference dim.
inline std::vector<Delta3Point> delta3(std::span<const EigenphaseSet> sets, std::span<const double> L_grid,
                                       Delta3Options opt = {}) {
    std::vector<Delta3Point> out;
    std::vector<std::vector<double>> unfolded;
    for (const auto &s : sets) {
        if (s.phases.size() < 2) throw ValidationError("delta3: each set needs at least 2 phases");
        unfolded.push_back(detail::unfold_phases_circular(s));
    }
    for (double L : L_grid) {
        if (!(L > 0.0)) throw ValidationError("delta3: window length must be positive");
        if (!(opt.stride_fraction > 0.0)) throw ValidationError("delta3: stride must be positive");
        detail::Delta3Accumulator acc;
        for (const auto &x : unfolded) detail::delta3_circular_accumulate(x, L, opt.stride_fraction * L, acc);
        out.push_back(Delta3Point{L, acc.sum / static_cast<double>(acc.windows), acc.windows});
    }
    return out;
}

inline std::vector<Delta3Point> delta3(const EigenphaseSet &set, std::span<const double> L_grid, Delta3Options opt = {}) {
    return delta3(std::span(&set, 1), L_grid, opt);
}

/// Delta_3(L) for line spectra that are already unfolded (unit mean spacing);
/// windows must fit inside each spectrum.
inline std::vector<Delta3Point> delta3_line(std::span<const std::vector<double>> spectra, std::span<const double> L_grid,
                                            Delta3Options opt = {}) {
    std::vector<std::vector<double>> sorted;
    for (const auto &s : spectra) {
        if (s.size() < 2) throw ValidationError("delta3: each spectrum needs at least 2 levels");
        sorted.push_back(detail::sorted_copy(s));
    }
    std::vector<Delta3Point> out;
    for (double L : L_grid) {
        if (!(L > 0.0)) throw ValidationError("delta3: window length must be positive");
        if (!(opt.stride_fraction > 0.0)) throw ValidationError("delta3: stride must be positive");
        detail::Delta3Accumulator acc;
        for (const auto &x : sorted) detail::delta3_line_accumulate(x, L, opt.stride_fraction * L, acc);
        out.push_back(Delta3Point{L, acc.sum / static_cast<double>(acc.windows), acc.windows});
    }
    return out;
}

/// Everything reported for one pooled configuration.
struct StatisticReport {
    RStatistic r;
    double r_set_spread = 0.0;  // std-dev of per-set r means
    std::size_t sets = 0;
    Histogram nns;
    std::vector<Delta3Point> delta3_curve;
};

struct StatisticOptions {
    HistogramSpec histogram{};
    std::vector<double> L_grid{1.0, 2.0, 5.0, 10.0, 15.0, 20.0};
    Delta3Options delta3{};
};

/// Pools a list of eigenphase sets into r, NNS and Delta_3. Window lengths
/// longer than the smallest set are skipped.
inline StatisticReport summarize(std::span<const EigenphaseSet> sets, const StatisticOptions &opt = {}) {
    if (sets.empty()) throw ValidationError("summarize: no eigenphase sets");
    StatisticReport rep;
    rep.sets = sets.size();
    rep.r = r_statistic(sets);

    std::vector<double> per_set;
    for (const auto &s : sets) per_set.push_back(r_statistic(s).mean);
    if (per_set.size() > 1) {
        const double m = std::accumulate(per_set.begin(), per_set.end(), 0.0) / static_cast<double>(per_set.size());
        double ss = 0.0;
        for (double x : per_set) ss += (x - m) * (x - m);
        rep.r_set_spread = std::sqrt(ss / static_cast<double>(per_set.size() - 1));
    }

    std::vector<SpacingEnsemble> parts;
    for (const auto &s : sets) parts.push_back(unfold_circular(s));
    rep.nns = nns_histogram(pool(parts), opt.histogram);

    std::size_t smallest = sets.front().size();
    for (const auto &s : sets) smallest = std::min(smallest, s.size());
    std::vector<double> grid;
    for (double L : opt.L_grid) {
        if (L <= static_cast<double>(smallest)) grid.push_back(L);
    }
    rep.delta3_curve = delta3(sets, grid, opt.delta3);
    return rep;
}

}  // namespace blockchaos
