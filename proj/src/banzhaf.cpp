#include "gst/banzhaf.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gst/rng.hpp"

namespace gst {

namespace {

double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// number of coalitions entering the k-bounded average: sum_{m=1..k} C(K-1, m-1)
double coalition_count(std::size_t pool_size, std::size_t k) {
    double n_s = 0.0;
    for (std::size_t m = 1; m <= k; ++m) n_s += binomial(pool_size - 1, m - 1);
    return n_s;
}

std::vector<std::size_t> mask_to_indices(std::uint32_t mask) {
    std::vector<std::size_t> idx;
    while (mask) {
        idx.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return idx;
}

}  // namespace

double BanzhafEstimate::variance_proxy() const {
    auto side = [](double sum, double sum_sq, std::int64_t n) {
        if (n < 2) return std::numeric_limits<double>::infinity();
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
        return var / static_cast<double>(n);
    };
    return side(sum_in, sum_sq_in, n_in) + side(sum_out, sum_sq_out, n_out);
}

CandidatePool select_candidates(const Matrix& calibrated_probs, const Matrix& teacher_logits,
                                const LabelState& state, std::size_t pool_size) {
    const auto& unlabeled = state.unlabeled();
    if (unlabeled.empty()) throw std::runtime_error("no unlabeled nodes left to pool");

    std::vector<NodeId> order = unlabeled;
    std::vector<double> conf(calibrated_probs.rows());
    for (NodeId v : unlabeled) {
        const auto i = static_cast<std::size_t>(v);
        conf[i] = calibrated_probs(i, argmax_row(calibrated_probs.row(i), calibrated_probs.cols()));
    }
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        const double ca = conf[static_cast<std::size_t>(a)], cb = conf[static_cast<std::size_t>(b)];
        if (ca != cb) return ca > cb;
        return a < b;
    });
    if (order.size() > pool_size) order.resize(pool_size);

    CandidatePool pool;
    pool.nodes = order;
    pool.teacher_logit_rows = Matrix(order.size(), teacher_logits.cols());
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto v = static_cast<std::size_t>(order[j]);
        pool.confidences.push_back(conf[v]);
        pool.pseudo_labels.push_back(
            static_cast<int>(argmax_row(calibrated_probs.row(v), calibrated_probs.cols())));
        const double* src = teacher_logits.row(v);
        for (std::size_t q = 0; q < teacher_logits.cols(); ++q) pool.teacher_logit_rows(j, q) = src[q];
    }
    return pool;
}

std::vector<double> exhaustive_banzhaf(std::size_t pool_size, const UtilityFn& utility_fn,
                                       std::size_t k) {
    if (pool_size > 16) throw std::invalid_argument("exhaustive Banzhaf is guarded to pools of <= 16");
    if (k < 1 || k > pool_size) throw std::invalid_argument("k must lie in [1, pool_size]");

    // memoize the utility of every coalition of size <= k exactly once
    const std::uint32_t n_masks = 1u << pool_size;
    std::vector<double> u(n_masks, std::numeric_limits<double>::quiet_NaN());
    for (std::uint32_t mask = 0; mask < n_masks; ++mask)
        if (static_cast<std::size_t>(std::popcount(mask)) <= k) u[mask] = utility_fn(mask_to_indices(mask));

    const double n_s = coalition_count(pool_size, k);
    std::vector<double> phi(pool_size, 0.0);
    for (std::size_t i = 0; i < pool_size; ++i) {
        const std::uint32_t bit = 1u << i;
        double acc = 0.0;
        for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            if (static_cast<std::size_t>(std::popcount(mask)) > k - 1) continue;
            acc += u[mask | bit] - u[mask];
        }
        phi[i] = acc / n_s;
    }
    return phi;
}

MsrResult msr_banzhaf(std::size_t pool_size, const UtilityFn& utility_fn, std::size_t k,
                      std::size_t n_samples, std::uint64_t seed, SamplingScheme scheme,
                      int n_threads) {
    if (n_samples == 0) throw std::invalid_argument("msr_banzhaf needs at least one sample");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const std::size_t k_eff = std::min(k, pool_size);

    const double expected_membership =
        static_cast<double>(n_samples) * static_cast<double>(k_eff) / (2.0 * static_cast<double>(pool_size));
    if (expected_membership < 5.0)
        std::fprintf(stderr,
                     "[banzhaf] warning: expected membership count %.2f < 5; "
                     "estimates will be noisy (B=%zu, k=%zu, K=%zu)\n",
                     expected_membership, n_samples, k_eff, pool_size);

    // one membership word-set and one utility value per sample
    const std::size_t words = (pool_size + 63) / 64;
    std::vector<std::uint64_t> membership(n_samples * words, 0);
    std::vector<double> values(n_samples);

    auto run_sample = [&](std::size_t b) {
        Rng rng = make_rng(hash_seed(seed, b));
        std::vector<std::size_t> subset;
        if (scheme == SamplingScheme::size_uniform) {
            const std::size_t m = 1 + static_cast<std::size_t>(uniform_u64(rng, k_eff));
            subset = sample_indices(rng, pool_size, m);
        } else {
            while (true) {
                subset.clear();
                for (std::size_t i = 0; i < pool_size; ++i)
                    if (rng() & 1u) subset.push_back(i);
                if (!subset.empty() && subset.size() <= k_eff) break;
            }
        }
        std::sort(subset.begin(), subset.end());
        values[b] = utility_fn(subset);
        for (std::size_t i : subset)
            membership[b * words + i / 64] |= std::uint64_t(1) << (i % 64);
    };

    const int workers = std::max(1, n_threads);
    if (workers == 1) {
        for (std::size_t b = 0; b < n_samples; ++b) run_sample(b);
    } else {
        std::vector<std::thread> pool_threads;
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (int t = 0; t < workers; ++t)
            pool_threads.emplace_back([&] {
                try {
                    for (std::size_t b = next.fetch_add(1); b < n_samples; b = next.fetch_add(1))
                        run_sample(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(n_samples);
                }
            });
        for (auto& th : pool_threads) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // deterministic post-hoc reduction in sample order
    MsrResult res;
    res.utility_calls = n_samples;
    res.estimates.assign(pool_size, BanzhafEstimate{});
    for (std::size_t b = 0; b < n_samples; ++b) {
        const double v = values[b];
        for (std::size_t i = 0; i < pool_size; ++i) {
            auto& e = res.estimates[i];
            if (membership[b * words + i / 64] >> (i % 64) & 1u) {
                e.n_in++;
                e.sum_in += v;
                e.sum_sq_in += v * v;
            } else {
                e.n_out++;
                e.sum_out += v;
                e.sum_sq_out += v * v;
            }
        }
    }
    bool warned = false;
    for (auto& e : res.estimates) {
        if (e.n_in == 0 || e.n_out == 0) {
            e.value = -std::numeric_limits<double>::infinity();
            if (!warned) {
                std::fprintf(stderr, "[banzhaf] warning: candidate with one-sided membership; "
                                     "value pinned to -inf\n");
                warned = true;
            }
        } else {
            e.value = e.sum_in / static_cast<double>(e.n_in) - e.sum_out / static_cast<double>(e.n_out);
        }
    }
    return res;
}

std::vector<std::pair<NodeId, int>> top_k_select(const std::vector<double>& values,
                                                 const CandidatePool& pool, std::size_t k) {
    if (values.size() != pool.size()) throw std::invalid_argument("top_k_select: size mismatch");
    if (k > pool.size()) throw std::invalid_argument("top_k_select: k exceeds the pool");

    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        if (pool.confidences[a] != pool.confidences[b]) return pool.confidences[a] > pool.confidences[b];
        return pool.nodes[a] < pool.nodes[b];
    });
    std::vector<std::pair<NodeId, int>> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        out.emplace_back(pool.nodes[order[i]], pool.pseudo_labels[order[i]]);
    return out;
}

// --- Ranking-robustness probe -------------------------------------------------

UtilityFn UtilityTable::as_fn() const {
    return [this](const std::vector<std::size_t>& subset) {
        std::uint32_t mask = 0;
        for (std::size_t i : subset) mask |= 1u << i;
        return value[mask];
    };
}

UtilityTable make_random_table(std::size_t pool_size, std::size_t max_coalition, std::uint64_t seed) {
    UtilityTable t;
    t.pool_size = pool_size;
    t.max_coalition = max_coalition;
    t.value.assign(std::size_t(1) << pool_size, 0.0);
    Rng rng = make_rng(seed);
    for (std::uint32_t mask = 0; mask < t.value.size(); ++mask)
        if (static_cast<std::size_t>(std::popcount(mask)) <= max_coalition)
            t.value[mask] = uniform_real(rng);
    return t;
}

UtilityTable make_additive_table(const std::vector<double>& weights, std::size_t max_coalition) {
    UtilityTable t;
    t.pool_size = weights.size();
    t.max_coalition = max_coalition;
    t.value.assign(std::size_t(1) << weights.size(), 0.0);
    for (std::uint32_t mask = 0; mask < t.value.size(); ++mask) {
        double s = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (mask >> i & 1u) s += weights[i];
        t.value[mask] = s;
    }
    return t;
}

RobustnessCertificate rank_robustness_probe(const UtilityTable& table, double noise_scale,
                                            std::size_t k, int n_perturbations,
                                            std::uint64_t seed) {
    const std::size_t K = table.pool_size;
    if (K > 12) throw std::invalid_argument("robustness probe is guarded to pools of <= 12");
    if (k < 2 || k > K) throw std::invalid_argument("probe needs 2 <= k <= pool size");

    const auto phi = exhaustive_banzhaf(K, table.as_fn(), k);

    // oriented mean margins Delta^{(m)}_{i,j}; orientation follows the exact
    // Banzhaf order of the pair so a positive margin supports the hypothesis
    RobustnessCertificate cert;
    cert.n_perturbations = n_perturbations;
    double tau = std::numeric_limits<double>::infinity();
    const std::uint32_t n_masks = 1u << K;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) {
            const std::size_t hi = phi[i] >= phi[j] ? i : j;
            const std::size_t lo = phi[i] >= phi[j] ? j : i;
            for (std::size_t m = 1; m + 1 <= k; ++m) {
                double sum = 0.0;
                for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
                    if (mask >> i & 1u || mask >> j & 1u) continue;
                    if (static_cast<std::size_t>(std::popcount(mask)) != m - 1) continue;
                    sum += table.at(mask | (1u << hi)) - table.at(mask | (1u << lo));
                }
                tau = std::min(tau, sum / binomial(K - 2, m - 1));
            }
        }
    }
    cert.tau = tau;
    cert.hypotheses_met = tau > 0.0;
    if (!cert.hypotheses_met) return cert;  // report, don't assert

    double budget_sq = 0.0;
    for (std::size_t m = 1; m + 1 <= k; ++m) budget_sq += binomial(K - 2, m - 1);
    cert.perturbation_norm = noise_scale * tau * std::sqrt(budget_sq);

    // perturbable coordinates: every nonempty coalition of size <= k
    std::vector<std::uint32_t> coords;
    for (std::uint32_t mask = 1; mask < n_masks; ++mask)
        if (static_cast<std::size_t>(std::popcount(mask)) <= k) coords.push_back(mask);

    Rng rng = make_rng(seed);
    for (int p = 0; p < n_perturbations; ++p) {
        std::vector<double> dir(coords.size());
        double norm = 0.0;
        for (auto& d : dir) {
            // Box-Muller; direction uniform on the sphere
            const double u1 = std::max(uniform_real(rng), 1e-300);
            const double u2 = uniform_real(rng);
            d = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            norm += d * d;
        }
        norm = std::sqrt(norm);

        UtilityTable noisy = table;
        for (std::size_t q = 0; q < coords.size(); ++q)
            noisy.value[coords[q]] += dir[q] / norm * cert.perturbation_norm;

        const auto phi_hat = exhaustive_banzhaf(K, noisy.as_fn(), k);
        int inverted = 0;
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = i + 1; j < K; ++j)
                if ((phi[i] - phi[j]) * (phi_hat[i] - phi_hat[j]) < 0.0) ++inverted;
        cert.n_inversions += inverted;
        if (inverted == 0) cert.n_clean++;
    }
    return cert;
}

}  // namespace gst
