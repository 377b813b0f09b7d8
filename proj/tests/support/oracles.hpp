#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here favors clarity over speed: from-scratch
// recomputation, naive loops, no incremental or batched tricks. Keep this
// file free of calls into the incremental code paths it is checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "infowalk/learner.hpp"

namespace testsupport {

// ---- sorted-list intersection ------------------------------------------

inline std::vector<uint32_t> naive_intersect(std::span<const uint32_t> a,
                                             std::span<const uint32_t> b) {
    std::vector<uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

// ---- walk entropy and correlation ---------------------------------------

// Shannon entropy (bits) of the visit distribution of a whole path.
inline double entropy_of_path(std::span<const uint32_t> path) {
    std::map<uint32_t, uint64_t> counts;
    for (uint32_t v : path) counts[v]++;
    double l = static_cast<double>(path.size());
    double h = 0.0;
    for (auto& [v, c] : counts) {
        double p = static_cast<double>(c) / l;
        h -= p * std::log2(p);
    }
    return h;
}

// Two-pass squared Pearson correlation; empty when a variance vanishes.
inline std::optional<double> pearson_r2(std::span<const double> xs,
                                        std::span<const double> ys) {
    size_t n = xs.size();
    if (n < 2 || ys.size() != n) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if (vx <= 1e-12 || vy <= 1e-12) return std::nullopt;
    double r2 = (cov * cov) / (vx * vy);
    return std::min(1.0, std::max(0.0, r2));
}

// Full-path walk oracle: stores the whole path and recomputes entropy and
// the entropy-length correlation from scratch after every visit.
struct PathOracle {
    std::vector<uint32_t> path;
    std::vector<double> h_series;

    void visit(uint32_t v) {
        path.push_back(v);
        h_series.push_back(entropy_of_path(path));
    }

    double h() const { return h_series.back(); }
    uint64_t len() const { return path.size(); }

    std::optional<double> r2() const {
        std::vector<double> ls(path.size());
        for (size_t i = 0; i < ls.size(); ++i)
            ls[i] = static_cast<double>(i + 1);
        return pearson_r2(h_series, ls);
    }

    bool should_terminate(double mu, uint64_t l_min, uint64_t l_max) const {
        uint64_t l = path.size();
        if (l >= l_max) return true;
        if (l < l_min || l < 2) return false;
        auto r = r2();
        if (!r) return false;
        return *r < mu;
    }
};

// ---- relative entropy ----------------------------------------------------

// KL divergence between the degree distribution and the (floored) corpus
// visit distribution, independent of the library's accumulation scheme.
inline double relative_entropy_naive(std::span<const uint64_t> deg,
                                     std::span<const uint64_t> ocn) {
    double deg_total = 0.0, occ_total = 0.0;
    for (size_t v = 0; v < deg.size(); ++v) {
        if (deg[v] == 0) continue;
        deg_total += static_cast<double>(deg[v]);
        occ_total += static_cast<double>(ocn[v] == 0 ? 1 : ocn[v]);
    }
    double d = 0.0;
    for (size_t v = 0; v < deg.size(); ++v) {
        if (deg[v] == 0) continue;
        double p = static_cast<double>(deg[v]) / deg_total;
        double q = static_cast<double>(ocn[v] == 0 ? 1 : ocn[v]) / occ_total;
        d += p * std::log2(p / q);
    }
    return d;
}

// ---- AUC -----------------------------------------------------------------

// All-pairs comparison: wins plus half-credit ties over every (pos, neg).
inline double brute_auc(std::span<const double> pos, std::span<const double> neg) {
    double wins = 0.0;
    for (double p : pos)
        for (double n : neg) {
            if (p > n)
                wins += 1.0;
            else if (p == n)
                wins += 0.5;
        }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

inline double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

// ---- skip-gram objective and gradients -----------------------------------

// Log-likelihood of one (context, target, negatives) group:
// log sigma(c.t) + sum_n log sigma(-c.n). The library's update ascends this.
inline double sgns_log_likelihood(std::span<const double> ctx,
                                  std::span<const double> target,
                                  const std::vector<std::vector<double>>& negs) {
    auto dot = [&](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    auto log_sigmoid = [](double x) {
        return -(std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))));
    };
    double ll = log_sigmoid(dot(ctx, target));
    for (const auto& n : negs) ll += log_sigmoid(-dot(ctx, {n.data(), n.size()}));
    return ll;
}

// Central finite-difference gradient of f over a flat parameter vector.
template <typename F>
std::vector<double> central_difference(F f, std::vector<double> params, double eps) {
    std::vector<double> grad(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        double orig = params[i];
        params[i] = orig + eps;
        double hi = f(params);
        params[i] = orig - eps;
        double lo = f(params);
        params[i] = orig;
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    return grad;
}

// ---- multi-window batch replay -------------------------------------------

// Expected effect of one batched multi-window lifetime, derived pair by
// pair with plain scalar loops. Walks advance in lockstep; per position the
// K step negatives are shared by every context of every walk, each walk's
// own target is its contexts' positive, and the other walks' targets act as
// extra negatives. Values are frozen at the start of each position and the
// deltas land on evolving local copies, mirroring a buffered lifetime.
struct ReplayResult {
    std::map<uint32_t, std::vector<double>> in_rows;  // row -> updated values
    std::map<uint32_t, std::vector<double>> out_rows; // row -> updated values
    uint64_t terms = 0;
    uint64_t pairs = 0;
    double nll = 0.0;
    std::vector<std::pair<size_t, size_t>> shapes; // per position: (contexts, columns)
};

inline ReplayResult replay_multiwindow(const infowalk::EmbeddingStore& store,
                                       const std::vector<std::vector<uint32_t>>& walks,
                                       uint32_t k, uint32_t w, double lr,
                                       std::span<const uint32_t> negatives) {
    ReplayResult rr;
    uint32_t d = store.d;
    auto in_of = [&](uint32_t row) -> std::vector<double>& {
        auto it = rr.in_rows.find(row);
        if (it == rr.in_rows.end()) {
            auto src = store.in_row(row);
            it = rr.in_rows.emplace(row, std::vector<double>(src.begin(), src.end()))
                     .first;
        }
        return it->second;
    };
    auto out_of = [&](uint32_t row) -> std::vector<double>& {
        auto it = rr.out_rows.find(row);
        if (it == rr.out_rows.end()) {
            auto src = store.out_row(row);
            it = rr.out_rows.emplace(row, std::vector<double>(src.begin(), src.end()))
                     .first;
        }
        return it->second;
    };
    // A real lifetime pre-loads every walk node's rows into the buffers.
    for (const auto& walk : walks)
        for (uint32_t v : walk) {
            in_of(store.row_of(v));
            out_of(store.row_of(v));
        }

    size_t max_len = 0;
    for (const auto& walk : walks) max_len = std::max(max_len, walk.size());
    for (uint32_t r : negatives) out_of(r);

    for (size_t t = 0; t < max_len; ++t) {
        // Collect live contexts and columns for this position.
        struct Ctx {
            uint32_t row;
            size_t walk;
        };
        struct Col {
            uint32_t row;
            int walk; // -1 for a drawn negative
        };
        std::vector<Ctx> ctxs;
        std::vector<Col> cols;
        for (size_t j = 0; j < walks.size(); ++j) {
            const auto& walk = walks[j];
            if (t >= walk.size()) continue;
            cols.push_back({store.row_of(walk[t]), static_cast<int>(j)});
            size_t lo = t > w ? t - w : 0;
            size_t hi = std::min(walk.size(), t + w + 1);
            for (size_t pos = lo; pos < hi; ++pos)
                if (pos != t) ctxs.push_back({store.row_of(walk[pos]), j});
        }
        if (ctxs.empty()) continue;
        for (uint32_t i = 0; i < k; ++i)
            cols.push_back({negatives[t * k + i], -1});
        rr.shapes.emplace_back(ctxs.size(), cols.size());

        // Freeze every involved row, then update pair by pair.
        std::map<uint32_t, std::vector<double>> frozen_in, frozen_out;
        for (const auto& c : ctxs)
            if (!frozen_in.count(c.row)) frozen_in[c.row] = in_of(c.row);
        for (const auto& c : cols)
            if (!frozen_out.count(c.row)) frozen_out[c.row] = out_of(c.row);

        for (const auto& ctx : ctxs) {
            const auto& cvec = frozen_in[ctx.row];
            for (const auto& col : cols) {
                const auto& ovec = frozen_out[col.row];
                double s = 0.0;
                for (uint32_t x = 0; x < d; ++x) s += cvec[x] * ovec[x];
                bool positive =
                    col.walk >= 0 && static_cast<size_t>(col.walk) == ctx.walk;
                double g = lr * ((positive ? 1.0 : 0.0) - 1.0 / (1.0 + std::exp(-s)));
                auto& in_row = in_of(ctx.row);
                auto& out_row = out_of(col.row);
                for (uint32_t x = 0; x < d; ++x) {
                    in_row[x] += g * ovec[x];
                    out_row[x] += g * cvec[x];
                }
                double z = positive ? s : -s;
                rr.nll += std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
                rr.terms++;
            }
            rr.pairs++;
        }
    }
    return rr;
}

} // namespace testsupport
