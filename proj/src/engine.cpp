#include "stochmatch/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "stochmatch/bounds.hpp"
#include "stochmatch/rng.hpp"

namespace stochmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Cumulative rates for drawing an event's type in proportion to its rate.
struct Sampler {
    std::vector<double> cum;
    double total = 0.0;
};

Sampler make_sampler(const Instance& inst) {
    Sampler s;
    s.cum.reserve(inst.online_types.size());
    double run = 0.0;
    for (const auto& type : inst.online_types) {
        run += std::max(type.rate, 0.0);
        s.cum.push_back(run);
    }
    s.total = run;
    return s;
}

/// Draws one replication's arrival stream as (time, type index) pairs.
/// Gap and type draws alternate on one generator stream, so the public
/// id-based sequence and the internal index-based one coincide.
void sample_into(const Sampler& s, std::uint64_t seed, std::uint64_t rep,
                 std::vector<std::pair<double, int>>& out) {
    out.clear();
    if (s.total <= 0.0) return;
    CounterRng rng(seed, rep, CounterRng::kArrivals);
    double t = 0.0;
    for (;;) {
        const double gap = rng.exponential(s.total);
        double next = t + gap;
        if (next <= t) next = std::nextafter(t, kInf);
        t = next;
        if (t > 1.0) break;
        const double target = rng.uniform() * s.total;
        auto it = std::lower_bound(s.cum.begin(), s.cum.end(), target);
        if (it == s.cum.end()) --it;
        out.push_back({t, static_cast<int>(it - s.cum.begin())});
    }
}

/// One attemptable neighbor of a type under the one-shot baseline: chosen
/// when the scaled uniform draw falls below cum.
struct SuggestedPick {
    double cum = 0.0;
    int j = -1;
    int stat = -1; ///< index into the classified edge list, -1 if untracked
    double weight = 0.0;
};

struct CompiledType {
    double rate = 0.0;
    bool active = false; ///< has classified edges
    bool second = false;
    int ja = -1, jb = -1; ///< offline neighbor indices
    int sa = -1, sb = -1; ///< classified-edge indices
    double wa = 0.0, wb = 0.0;
};

/// Index-based view of a preprocessed instance for the inner loops.
struct Compiled {
    const PreprocessedInstance* pinst = nullptr;
    Sampler sampler;
    int n_off = 0;
    double t0 = 0.0, t1 = 1.0;
    std::map<std::string, int> off_index;
    std::map<std::string, int> type_index;
    std::vector<CompiledType> types;
    std::vector<double> rates;
    std::vector<std::vector<SuggestedPick>> picks;
    std::vector<std::pair<int, int>> pairs; ///< second-class neighbor pairs
};

std::vector<std::vector<SuggestedPick>> build_picks(
    const Instance& inst, const FractionalMatching& fm,
    const std::map<std::string, int>& off_index,
    const std::map<std::pair<std::string, std::string>, int>* stat_of) {
    std::vector<std::vector<SuggestedPick>> picks(inst.online_types.size());
    for (std::size_t k = 0; k < inst.online_types.size(); ++k) {
        const auto& type = inst.online_types[k];
        double cum = 0.0;
        for (const auto& edge : type.edges) {
            const double f = fm.flow(type.id, edge.offline);
            if (f <= kTol) continue;
            cum += f;
            SuggestedPick pick;
            pick.cum = cum;
            pick.j = off_index.at(edge.offline);
            pick.weight = edge.weight;
            if (stat_of) {
                const auto it = stat_of->find({type.id, edge.offline});
                if (it == stat_of->end()) {
                    throw std::logic_error("positive flow missing from the "
                                           "classified edge list");
                }
                pick.stat = it->second;
            }
            picks[k].push_back(pick);
        }
    }
    return picks;
}

Compiled compile(const PreprocessedInstance& pinst) {
    Compiled c;
    c.pinst = &pinst;
    c.t0 = pinst.t0;
    c.t1 = pinst.t1;
    c.n_off = static_cast<int>(pinst.inst.offline.size());
    for (int j = 0; j < c.n_off; ++j) c.off_index[pinst.inst.offline[j]] = j;
    for (std::size_t k = 0; k < pinst.inst.online_types.size(); ++k) {
        c.type_index[pinst.inst.online_types[k].id] = static_cast<int>(k);
    }
    c.sampler = make_sampler(pinst.inst);
    c.types.resize(pinst.inst.online_types.size());
    c.rates.resize(pinst.inst.online_types.size());
    for (std::size_t k = 0; k < pinst.inst.online_types.size(); ++k) {
        c.types[k].rate = pinst.inst.online_types[k].rate;
        c.rates[k] = c.types[k].rate;
    }

    std::map<std::pair<std::string, std::string>, int> stat_of;
    for (std::size_t s = 0; s < pinst.edges.size(); ++s) {
        const ClassifiedEdge& edge = pinst.edges[s];
        stat_of[{edge.i, edge.j}] = static_cast<int>(s);
        CompiledType& ct = c.types[c.type_index.at(edge.i)];
        const int j = c.off_index.at(edge.j);
        ct.active = true;
        ct.second = edge.cls == EdgeClass::Second;
        if (ct.ja < 0) {
            ct.ja = j;
            ct.sa = static_cast<int>(s);
            ct.wa = edge.weight;
        } else if (ct.jb < 0) {
            ct.jb = j;
            ct.sb = static_cast<int>(s);
            ct.wb = edge.weight;
        } else {
            throw std::logic_error("more than two classified edges on type '" +
                                   edge.i + "'");
        }
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& ct : c.types) {
        if (!ct.active) continue;
        if (ct.second) {
            if (ct.jb < 0 || ct.ja == ct.jb) {
                throw std::logic_error("second-class type without two "
                                       "distinct neighbors");
            }
            if (seen.insert(std::minmax(ct.ja, ct.jb)).second) {
                c.pairs.push_back({ct.ja, ct.jb});
            }
        } else if (ct.jb >= 0) {
            throw std::logic_error("first-class type with two neighbors");
        }
    }
    c.picks = build_picks(pinst.inst, pinst.matching, c.off_index, &stat_of);
    return c;
}

/// Runs the staged policy on one replication. on_match(arrival index,
/// offline index, classified-edge index, time) fires on every match.
template <class OnMatch>
double multistage_rep(const Compiled& c,
                      const std::vector<std::pair<double, int>>& arr,
                      CounterRng& coin, std::vector<double>& match_time,
                      std::vector<char>& snap, OnMatch&& on_match) {
    std::fill(match_time.begin(), match_time.end(), kInf);
    bool have_snap = false;
    double weight = 0.0;
    for (std::size_t idx = 0; idx < arr.size(); ++idx) {
        const double t = arr[idx].first;
        const CompiledType& ct = c.types[arr[idx].second];
        if (!ct.active) continue;
        int target, stat;
        double w;
        if (!ct.second) {
            target = ct.ja;
            stat = ct.sa;
            w = ct.wa;
        } else {
            if (t <= c.t0) continue;
            bool use_coin = true;
            bool pick_a = false;
            if (t > c.t1) {
                if (!have_snap) {
                    // Offline statuses frozen at t1: arrivals are in time
                    // order, so everything at or before t1 has been played.
                    for (int j = 0; j < c.n_off; ++j) {
                        snap[j] = match_time[j] == kInf ? 1 : 0;
                    }
                    have_snap = true;
                }
                const bool free_a = snap[ct.ja] != 0;
                const bool free_b = snap[ct.jb] != 0;
                if (free_a != free_b) {
                    use_coin = false;
                    pick_a = free_a;
                }
            }
            if (use_coin) pick_a = coin.coin();
            target = pick_a ? ct.ja : ct.jb;
            stat = pick_a ? ct.sa : ct.sb;
            w = pick_a ? ct.wa : ct.wb;
        }
        if (match_time[target] == kInf) {
            match_time[target] = t;
            weight += w;
            on_match(idx, target, stat, t);
        }
    }
    return weight;
}

/// Runs the one-shot baseline on one replication.
template <class OnMatch>
double suggested_rep(const std::vector<std::vector<SuggestedPick>>& picks,
                     const std::vector<double>& rates,
                     const std::vector<std::pair<double, int>>& arr,
                     CounterRng& rng, std::vector<double>& match_time,
                     OnMatch&& on_match) {
    std::fill(match_time.begin(), match_time.end(), kInf);
    double weight = 0.0;
    for (std::size_t idx = 0; idx < arr.size(); ++idx) {
        const double t = arr[idx].first;
        const int ti = arr[idx].second;
        const auto& options = picks[ti];
        if (options.empty()) continue;
        const double u = rng.uniform() * rates[ti];
        const SuggestedPick* chosen = nullptr;
        for (const auto& pick : options) {
            if (u < pick.cum) {
                chosen = &pick;
                break;
            }
        }
        if (!chosen) continue; // residual probability: discard
        if (match_time[chosen->j] == kInf) {
            match_time[chosen->j] = t;
            weight += chosen->weight;
            on_match(idx, chosen->j, chosen->stat, t);
        }
    }
    return weight;
}

std::vector<std::pair<double, int>> to_indices(
    const ArrivalSequence& arr, const std::map<std::string, int>& type_index) {
    std::vector<std::pair<double, int>> out;
    out.reserve(arr.arrivals.size());
    double prev = -kInf;
    for (const auto& a : arr.arrivals) {
        if (!(a.t >= 0.0 && a.t <= 1.0)) {
            throw std::invalid_argument("arrival time outside [0, 1]");
        }
        if (!(a.t > prev)) {
            throw std::invalid_argument("arrival times must strictly "
                                        "increase");
        }
        prev = a.t;
        const auto it = type_index.find(a.type);
        if (it == type_index.end()) {
            throw std::invalid_argument("arrival of unknown type '" + a.type +
                                        "'");
        }
        out.push_back({a.t, it->second});
    }
    return out;
}

MatchResult collect_result(const Instance& inst,
                           const std::vector<double>& match_time,
                           std::vector<MatchedPair> pairs, double weight) {
    MatchResult res;
    res.pairs = std::move(pairs);
    for (std::size_t j = 0; j < inst.offline.size(); ++j) {
        res.match_time[inst.offline[j]] = match_time[j];
    }
    res.weight = weight;
    return res;
}

/// Assignment-problem minimum cost on a dense n x n matrix (row-major),
/// by shortest augmenting paths with dual potentials.
double assignment_min(const std::vector<double>& cost, int n) {
    if (n == 0) return 0.0;
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur =
                    cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        if (match[j] != 0) total += cost[(match[j] - 1) * n + (j - 1)];
    }
    return total;
}

/// Fills a square negated-weight matrix for the realized arrivals and
/// returns the maximum matching weight. type_weight is row-major over
/// (type index, offline index); buffer is scratch reused across calls.
double realized_optimum(const std::vector<std::pair<double, int>>& arr,
                        const std::vector<double>& type_weight, int n_off,
                        std::vector<double>& buffer) {
    const int n = std::max(static_cast<int>(arr.size()), n_off);
    if (n == 0) return 0.0;
    buffer.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t a = 0; a < arr.size(); ++a) {
        const int ti = arr[a].second;
        for (int j = 0; j < n_off; ++j) {
            buffer[a * n + j] = -type_weight[ti * n_off + j];
        }
    }
    return 0.0 - assignment_min(buffer, n);
}

std::vector<double> weight_matrix(const Instance& inst,
                                  const std::map<std::string, int>& off_index) {
    const int n_off = static_cast<int>(inst.offline.size());
    std::vector<double> wm(inst.online_types.size() * n_off, 0.0);
    for (std::size_t k = 0; k < inst.online_types.size(); ++k) {
        for (const auto& edge : inst.online_types[k].edges) {
            wm[k * n_off + off_index.at(edge.offline)] = edge.weight;
        }
    }
    return wm;
}

} // namespace

ArrivalSequence sample_arrivals(const Instance& inst, std::uint64_t seed,
                                std::uint64_t replication) {
    {
        const ValidationReport report = validate_instance(inst);
        if (!report.ok()) {
            throw std::invalid_argument("invalid instance: " +
                                        report.to_string());
        }
    }
    const Sampler sampler = make_sampler(inst);
    std::vector<std::pair<double, int>> raw;
    sample_into(sampler, seed, replication, raw);
    ArrivalSequence out;
    out.seed = seed;
    out.replication = replication;
    out.arrivals.reserve(raw.size());
    for (const auto& [t, ti] : raw) {
        out.arrivals.push_back({t, inst.online_types[ti].id});
    }
    return out;
}

ArrivalSequence relabel_arrivals(const ArrivalSequence& arr,
                                 const SplitMap& split, std::uint64_t seed) {
    ArrivalSequence out;
    out.seed = arr.seed;
    out.replication = arr.replication;
    out.arrivals.reserve(arr.arrivals.size());
    CounterRng rng(seed, arr.replication, CounterRng::kRelabel);
    for (const auto& a : arr.arrivals) {
        const auto it = split.find(a.type);
        if (it == split.end() || it->second.empty()) {
            out.arrivals.push_back(a);
            continue;
        }
        double total = 0.0;
        for (const auto& child : it->second) total += child.rate;
        if (total <= 0.0) {
            out.arrivals.push_back(a);
            continue;
        }
        const double target = rng.uniform() * total;
        double cum = 0.0;
        const SplitChild* chosen = &it->second.back();
        for (const auto& child : it->second) {
            cum += child.rate;
            if (target < cum) {
                chosen = &child;
                break;
            }
        }
        out.arrivals.push_back({a.t, chosen->child});
    }
    return out;
}

MatchResult run_multistage(const PreprocessedInstance& pinst,
                           const ArrivalSequence& arr, std::uint64_t seed) {
    const Compiled c = compile(pinst);
    const auto indices = to_indices(arr, c.type_index);
    CounterRng coin(seed, arr.replication, CounterRng::kPolicy);
    std::vector<double> match_time(c.n_off);
    std::vector<char> snap(c.n_off);
    std::vector<MatchedPair> pairs;
    const double weight = multistage_rep(
        c, indices, coin, match_time, snap,
        [&](std::size_t idx, int j, int, double t) {
            pairs.push_back({idx, pinst.inst.offline[j], t});
        });
    return collect_result(pinst.inst, match_time, std::move(pairs), weight);
}

MatchResult run_suggested(const Instance& inst, const FractionalMatching& fm,
                          const ArrivalSequence& arr, std::uint64_t seed) {
    {
        ValidationReport report = validate_instance(inst);
        if (!report.ok()) {
            throw std::invalid_argument("invalid instance: " +
                                        report.to_string());
        }
        report = validate_matching_basic(inst, fm);
        if (!report.ok()) {
            throw std::invalid_argument("invalid matching: " +
                                        report.to_string());
        }
    }
    std::map<std::string, int> off_index, type_index;
    for (std::size_t j = 0; j < inst.offline.size(); ++j) {
        off_index[inst.offline[j]] = static_cast<int>(j);
    }
    for (std::size_t k = 0; k < inst.online_types.size(); ++k) {
        type_index[inst.online_types[k].id] = static_cast<int>(k);
    }
    std::vector<double> rates;
    rates.reserve(inst.online_types.size());
    for (const auto& type : inst.online_types) rates.push_back(type.rate);
    const auto picks = build_picks(inst, fm, off_index, nullptr);
    const auto indices = to_indices(arr, type_index);
    CounterRng rng(seed, arr.replication, CounterRng::kPolicy);
    std::vector<double> match_time(inst.offline.size());
    std::vector<MatchedPair> pairs;
    const double weight = suggested_rep(
        picks, rates, indices, rng, match_time,
        [&](std::size_t idx, int j, int, double t) {
            pairs.push_back({idx, inst.offline[j], t});
        });
    return collect_result(inst, match_time, std::move(pairs), weight);
}

double offline_optimum(const Instance& inst, const ArrivalSequence& arr) {
    {
        const ValidationReport report = validate_instance(inst);
        if (!report.ok()) {
            throw std::invalid_argument("invalid instance: " +
                                        report.to_string());
        }
    }
    std::map<std::string, int> off_index, type_index;
    for (std::size_t j = 0; j < inst.offline.size(); ++j) {
        off_index[inst.offline[j]] = static_cast<int>(j);
    }
    for (std::size_t k = 0; k < inst.online_types.size(); ++k) {
        type_index[inst.online_types[k].id] = static_cast<int>(k);
    }
    const auto indices = to_indices(arr, type_index);
    const auto wm = weight_matrix(inst, off_index);
    std::vector<double> buffer;
    return realized_optimum(indices, wm,
                            static_cast<int>(inst.offline.size()), buffer);
}

std::vector<double> uniform_grid(int points) {
    if (points < 2) throw std::invalid_argument("need at least 2 grid points");
    std::vector<double> grid(points);
    for (int k = 0; k < points; ++k) {
        grid[k] = static_cast<double>(k) / (points - 1);
    }
    return grid;
}

namespace {

/// Per-thread integer tallies; merging across threads is exact.
struct Accum {
    std::vector<long long> edge_count;
    std::vector<std::vector<long long>> surv; // offline x (grid size + 1)
    // pair x direction x conditioning value -> match-time histogram
    std::vector<std::array<std::array<std::vector<long long>, 2>, 2>> cond;
};

} // namespace

RunStats monte_carlo(const PreprocessedInstance& pinst, Policy policy,
                     long long trials, std::uint64_t seed,
                     const std::vector<double>& grid,
                     const MonteCarloOptions& options) {
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    if (grid.empty()) throw std::invalid_argument("empty time grid");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) {
            throw std::invalid_argument("grid times must lie in [0, 1]");
        }
        if (k > 0 && !(grid[k] > grid[k - 1])) {
            throw std::invalid_argument("grid times must strictly increase");
        }
    }
    const Compiled c = compile(pinst);
    const int n_off = c.n_off;
    const int buckets = static_cast<int>(grid.size()) + 1;

    int threads = options.threads;
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads < 1) threads = 1;
    }
    if (static_cast<long long>(threads) > trials) {
        threads = static_cast<int>(trials);
    }

    std::vector<Accum> accs(threads);
    for (auto& acc : accs) {
        acc.edge_count.assign(c.pinst->edges.size(), 0);
        acc.surv.assign(n_off, std::vector<long long>(buckets, 0));
        acc.cond.resize(c.pairs.size());
        for (auto& per_pair : acc.cond) {
            for (auto& per_dir : per_pair) {
                for (auto& hist : per_dir) hist.assign(buckets, 0);
            }
        }
    }
    std::vector<double> weights(trials);
    std::vector<double> opts(options.with_opt ? trials : 0);
    std::vector<double> wm;
    if (options.with_opt) wm = weight_matrix(pinst.inst, c.off_index);

    auto bucket_of = [&grid](double time) {
        return static_cast<int>(
            std::upper_bound(grid.begin(), grid.end(), time) - grid.begin());
    };

    auto worker = [&](int w, long long lo, long long hi) {
        Accum& acc = accs[w];
        std::vector<std::pair<double, int>> arr;
        arr.reserve(64);
        std::vector<double> match_time(n_off);
        std::vector<char> snap(n_off);
        std::vector<double> opt_buffer;
        auto count_match = [&](std::size_t, int, int stat, double) {
            ++acc.edge_count[stat];
        };
        for (long long rep = lo; rep < hi; ++rep) {
            sample_into(c.sampler, seed, static_cast<std::uint64_t>(rep), arr);
            CounterRng rng(seed, static_cast<std::uint64_t>(rep),
                           CounterRng::kPolicy);
            weights[rep] =
                policy == Policy::Multistage
                    ? multistage_rep(c, arr, rng, match_time, snap,
                                     count_match)
                    : suggested_rep(c.picks, c.rates, arr, rng, match_time,
                                    count_match);
            for (int j = 0; j < n_off; ++j) {
                ++acc.surv[j][bucket_of(match_time[j])];
            }
            for (std::size_t p = 0; p < c.pairs.size(); ++p) {
                const auto [ja, jb] = c.pairs[p];
                const int ka = match_time[ja] > c.t1 ? 1 : 0;
                const int kb = match_time[jb] > c.t1 ? 1 : 0;
                ++acc.cond[p][0][kb][bucket_of(match_time[ja])];
                ++acc.cond[p][1][ka][bucket_of(match_time[jb])];
            }
            if (options.with_opt) {
                opts[rep] = realized_optimum(arr, wm, n_off, opt_buffer);
            }
        }
    };

    if (threads == 1) {
        worker(0, 0, trials);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const long long base = trials / threads;
        const long long rem = trials % threads;
        long long lo = 0;
        for (int w = 0; w < threads; ++w) {
            const long long hi = lo + base + (w < rem ? 1 : 0);
            pool.emplace_back(worker, w, lo, hi);
            lo = hi;
        }
        for (auto& th : pool) th.join();
    }

    // Merge the integer tallies; order cannot affect the result.
    Accum total = std::move(accs[0]);
    for (int w = 1; w < threads; ++w) {
        for (std::size_t e = 0; e < total.edge_count.size(); ++e) {
            total.edge_count[e] += accs[w].edge_count[e];
        }
        for (int j = 0; j < n_off; ++j) {
            for (int b = 0; b < buckets; ++b) {
                total.surv[j][b] += accs[w].surv[j][b];
            }
        }
        for (std::size_t p = 0; p < c.pairs.size(); ++p) {
            for (int d = 0; d < 2; ++d) {
                for (int k = 0; k < 2; ++k) {
                    for (int b = 0; b < buckets; ++b) {
                        total.cond[p][d][k][b] += accs[w].cond[p][d][k][b];
                    }
                }
            }
        }
    }

    RunStats stats;
    stats.policy = policy;
    stats.trials = trials;
    stats.t0 = c.t0;
    stats.t1 = c.t1;
    stats.grid = grid;

    const double budget = surplus_budget();
    const double n = static_cast<double>(trials);
    for (std::size_t e = 0; e < pinst.edges.size(); ++e) {
        const ClassifiedEdge& edge = pinst.edges[e];
        EdgeStat stat;
        stat.i = edge.i;
        stat.j = edge.j;
        stat.cls = edge.cls;
        stat.x = edge.flow;
        stat.matched = total.edge_count[e];
        const double p = static_cast<double>(stat.matched) / n;
        stat.ratio = p / edge.flow;
        stat.std_error = std::sqrt(p * (1.0 - p) / n) / edge.flow;
        const double y = pinst.y.at(edge.j);
        if (y <= budget + 1e-12) {
            stat.bound = edge.cls == EdgeClass::First
                             ? bounds::ratio_first(y, c.t0, c.t1)
                             : bounds::ratio_second(y, c.t0, c.t1);
        } else {
            stat.bound = 0.0; // outside the analysis: nothing guaranteed
        }
        stats.edges.push_back(std::move(stat));
    }

    for (int j = 0; j < n_off; ++j) {
        SurvivalCurve curve;
        curve.j = pinst.inst.offline[j];
        curve.value.resize(grid.size());
        long long alive = 0;
        for (int b = buckets - 1; b >= 1; --b) {
            alive += total.surv[j][b];
            if (b - 1 < static_cast<int>(grid.size())) {
                curve.value[b - 1] = static_cast<double>(alive) / n;
            }
        }
        stats.survival.push_back(std::move(curve));
    }

    for (std::size_t p = 0; p < c.pairs.size(); ++p) {
        const auto [ja, jb] = c.pairs[p];
        for (int d = 0; d < 2; ++d) {
            const int obs = d == 0 ? ja : jb;
            const int giv = d == 0 ? jb : ja;
            for (int k = 0; k < 2; ++k) {
                const auto& hist = total.cond[p][d][k];
                ConditionalCurve curve;
                curve.j = pinst.inst.offline[obs];
                curve.given = pinst.inst.offline[giv];
                curve.unmatched_at_t1 = k;
                for (int b = 0; b < buckets; ++b) curve.base += hist[b];
                curve.survivors.resize(grid.size());
                long long alive = 0;
                for (int b = buckets - 1; b >= 1; --b) {
                    alive += hist[b];
                    if (b - 1 < static_cast<int>(grid.size())) {
                        curve.survivors[b - 1] = alive;
                    }
                }
                stats.conditional.push_back(std::move(curve));
            }
        }
    }

    double sum = 0.0, sum_sq = 0.0;
    for (long long r = 0; r < trials; ++r) {
        sum += weights[r];
        sum_sq += weights[r] * weights[r];
    }
    stats.mean_weight = sum / n;
    if (trials > 1) {
        const double var =
            std::max(sum_sq - sum * sum / n, 0.0) / (n - 1.0);
        stats.weight_std_error = std::sqrt(var / n);
    }
    if (options.with_opt) {
        stats.has_opt = true;
        double osum = 0.0, osum_sq = 0.0;
        for (long long r = 0; r < trials; ++r) {
            osum += opts[r];
            osum_sq += opts[r] * opts[r];
        }
        stats.mean_opt = osum / n;
        if (trials > 1) {
            const double var =
                std::max(osum_sq - osum * osum / n, 0.0) / (n - 1.0);
            stats.opt_std_error = std::sqrt(var / n);
        }
    }
    return stats;
}

namespace {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char ch : value) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

const char* class_name(EdgeClass cls) {
    return cls == EdgeClass::First ? "first" : "second";
}

} // namespace

std::string stats_to_csv(const RunStats& stats) {
    std::string out = "edge_i,edge_j,class,x_ij,matched_count,ratio,stderr\n";
    for (const auto& edge : stats.edges) {
        out += csv_field(edge.i);
        out += ',';
        out += csv_field(edge.j);
        out += ',';
        out += class_name(edge.cls);
        out += ',';
        out += format_double(edge.x);
        out += ',';
        out += std::to_string(edge.matched);
        out += ',';
        out += format_double(edge.ratio);
        out += ',';
        out += format_double(edge.std_error);
        out += '\n';
    }
    return out;
}

std::string stats_to_json(const RunStats& stats) {
    nlohmann::ordered_json doc;
    doc["policy"] =
        stats.policy == Policy::Multistage ? "multistage" : "suggested";
    doc["trials"] = stats.trials;
    doc["t0"] = stats.t0;
    doc["t1"] = stats.t1;
    doc["grid"] = stats.grid;
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& edge : stats.edges) {
        doc["edges"].push_back({{"i", edge.i},
                                {"j", edge.j},
                                {"class", class_name(edge.cls)},
                                {"x", edge.x},
                                {"matched", edge.matched},
                                {"ratio", edge.ratio},
                                {"stderr", edge.std_error},
                                {"bound", edge.bound}});
    }
    doc["survival"] = nlohmann::ordered_json::object();
    for (const auto& curve : stats.survival) {
        doc["survival"][curve.j] = curve.value;
    }
    doc["conditional"] = nlohmann::ordered_json::array();
    for (const auto& curve : stats.conditional) {
        doc["conditional"].push_back(
            {{"j", curve.j},
             {"given", curve.given},
             {"unmatched_at_t1", curve.unmatched_at_t1},
             {"base", curve.base},
             {"survivors", curve.survivors}});
    }
    doc["mean_weight"] = stats.mean_weight;
    doc["weight_stderr"] = stats.weight_std_error;
    if (stats.has_opt) {
        doc["mean_opt"] = stats.mean_opt;
        doc["opt_stderr"] = stats.opt_std_error;
    }
    return doc.dump(2);
}

} // namespace stochmatch
