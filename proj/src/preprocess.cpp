#include "stochmatch/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace stochmatch {

namespace {

/// Smallest-noise spacing kept between interval boundaries; children
/// narrower than this carry no usable flow and are dropped.
constexpr double kBoundaryTol = 1e-12;

std::string unique_offline_id(const Instance& inst, std::string base) {
    while (inst.offline_index(base) != Instance::npos) base += '\'';
    return base;
}

std::string unique_online_id(const Instance& inst, std::string base) {
    while (inst.online_index(base) != Instance::npos) base += '\'';
    return base;
}

void require_valid(const Instance& inst) {
    const ValidationReport report = validate_instance(inst);
    if (!report.ok()) {
        throw std::invalid_argument("invalid instance: " + report.to_string());
    }
}

void require_types_saturated(const Instance& inst,
                             const FractionalMatching& fm) {
    for (const auto& type : inst.online_types) {
        if (std::abs(fm.online_mass(type.id) - type.rate) > kTol) {
            throw std::invalid_argument("type '" + type.id +
                                        "' does not carry its full rate");
        }
    }
}

} // namespace

PaddedResult pad_online(const Instance& inst, const FractionalMatching& fm) {
    require_valid(inst);
    {
        const ValidationReport report = validate_matching(inst, fm);
        if (!report.ok()) {
            throw std::invalid_argument("invalid matching: " +
                                        report.to_string());
        }
    }
    PaddedResult out{inst, fm};
    for (auto& type : out.inst.online_types) {
        const double deficit = type.rate - out.fm.online_mass(type.id);
        if (deficit <= kTol) continue;
        // Values within 1e-9 below an integer count as that integer, so m
        // does not jump on float noise.
        const long m =
            std::max(static_cast<long>(std::ceil(deficit - kTol)), 2L);
        const double share = deficit / static_cast<double>(m);
        for (long k = 0; k < m; ++k) {
            const std::string id = unique_offline_id(
                out.inst, std::string(kDummyPrefix) + "pad/" + type.id + "/" +
                              std::to_string(k));
            out.inst.offline.push_back(id);
            type.edges.push_back({id, 0.0});
            out.fm.x.push_back({type.id, id, share});
        }
    }
    return out;
}

PaddedResult pad_offline(const Instance& inst, const FractionalMatching& fm) {
    require_valid(inst);
    require_types_saturated(inst, fm);
    PaddedResult out{inst, fm};
    const std::string d0 =
        unique_offline_id(out.inst, std::string(kDummyPrefix) + "off/0");
    out.inst.offline.push_back(d0);
    const std::string d1 =
        unique_offline_id(out.inst, std::string(kDummyPrefix) + "off/1");
    out.inst.offline.push_back(d1);

    OnlineType dummy;
    dummy.id = unique_online_id(out.inst, std::string(kDummyPrefix) + "type");
    double rate = 0.0;
    std::vector<FlowEntry> flows;
    for (const auto& j : out.inst.offline) {
        const double need = 1.0 - out.fm.offline_mass(j);
        if (need <= kTol) continue;
        dummy.edges.push_back({j, 0.0});
        flows.push_back({dummy.id, j, need});
        rate += need;
    }
    dummy.rate = rate;
    out.inst.online_types.push_back(std::move(dummy));
    for (auto& entry : flows) out.fm.x.push_back(std::move(entry));
    return out;
}

SplitResult split_types(const Instance& inst, const FractionalMatching& fm) {
    require_valid(inst);
    {
        const ValidationReport report = validate_matching_basic(inst, fm);
        if (!report.ok()) {
            throw std::invalid_argument("invalid matching: " +
                                        report.to_string());
        }
    }
    require_types_saturated(inst, fm);

    SplitResult out;
    out.inst.offline = inst.offline;
    std::set<std::string> used_ids;
    for (const auto& type : inst.online_types) used_ids.insert(type.id);

    for (const auto& type : inst.online_types) {
        // This type's positive flows, in edge declaration order.
        std::vector<const Edge*> segs;
        std::vector<double> flows;
        double total = 0.0;
        for (const auto& edge : type.edges) {
            const double f = fm.flow(type.id, edge.offline);
            if (f > 0.0) {
                segs.push_back(&edge);
                flows.push_back(f);
                total += f;
            }
        }

        auto pass_through = [&]() {
            out.inst.online_types.push_back(type);
            for (const auto& entry : fm.x) {
                if (entry.i == type.id) out.fm.x.push_back(entry);
            }
        };

        if (type.rate <= kTol) {
            pass_through(); // inert: never arrives
            continue;
        }

        // Edge u covers [cum[u], cum[u+1]) of [0, rate); rescale so the
        // last boundary lands on the rate exactly.
        const double rate = type.rate;
        const double half = rate / 2.0;
        std::vector<double> cum(segs.size() + 1, 0.0);
        for (std::size_t u = 0; u < segs.size(); ++u) {
            cum[u + 1] = cum[u] + flows[u];
        }
        const double scale = rate / total;
        for (auto& c : cum) c *= scale;
        cum.back() = rate;

        // Cut positions in [0, half]: every edge boundary of the lower
        // half and every boundary of the upper half shifted down.
        std::vector<double> cuts{0.0};
        for (std::size_t u = 1; u + 1 <= segs.size(); ++u) {
            const double c = cum[u];
            if (c < half) {
                cuts.push_back(c);
            } else if (c > half) {
                cuts.push_back(c - half);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        std::vector<double> dedup{0.0};
        for (double c : cuts) {
            if (c > dedup.back() + kBoundaryTol) dedup.push_back(c);
        }
        if (half - dedup.back() <= kBoundaryTol) {
            dedup.back() = half;
        } else {
            dedup.push_back(half);
        }

        if (dedup.size() == 2) {
            // No interior cut: the type already has an admissible shape.
            pass_through();
            continue;
        }

        // Position p lies in the edge whose interval contains it.
        auto edge_at = [&](double p) -> std::size_t {
            const auto it = std::upper_bound(cum.begin() + 1, cum.end(), p);
            const std::size_t u = static_cast<std::size_t>(
                it - (cum.begin() + 1));
            return std::min(u, segs.size() - 1);
        };

        std::vector<SplitChild> children;
        long ordinal = 0;
        for (std::size_t k = 0; k + 1 < dedup.size(); ++k) {
            const double lo = dedup[k];
            const double len = dedup[k + 1] - lo;
            const double child_rate = 2.0 * len;
            if (child_rate < kBoundaryTol) continue;
            const double mid = lo + len / 2.0;
            const std::size_t e1 = edge_at(mid);
            const std::size_t e2 = edge_at(mid + half);

            std::string id = type.id + "#" + std::to_string(ordinal++);
            while (used_ids.count(id)) id += '\'';
            used_ids.insert(id);

            OnlineType child;
            child.id = id;
            child.rate = child_rate;
            if (e1 == e2) {
                child.edges.push_back(*segs[e1]);
                out.fm.x.push_back({id, segs[e1]->offline, child_rate});
            } else {
                child.edges.push_back(*segs[e1]);
                child.edges.push_back(*segs[e2]);
                out.fm.x.push_back({id, segs[e1]->offline, len});
                out.fm.x.push_back({id, segs[e2]->offline, len});
            }
            out.inst.online_types.push_back(std::move(child));
            children.push_back({id, child_rate});
        }
        out.split[type.id] = std::move(children);
    }
    return out;
}

PreprocessResult preprocess(const Instance& inst, const FractionalMatching& fm,
                            double t0, double t1) {
    if (!(0.0 <= t0 && t0 <= t1 && t1 <= 1.0)) {
        throw std::invalid_argument("need 0 <= t0 <= t1 <= 1");
    }
    require_valid(inst);
    {
        const ValidationReport report = validate_matching(inst, fm);
        if (!report.ok()) {
            throw std::invalid_argument("invalid matching: " +
                                        report.to_string());
        }
    }
    const PaddedResult a = pad_online(inst, fm);
    const PaddedResult b = pad_offline(a.inst, a.fm);
    SplitResult c = split_types(b.inst, b.fm);

    PreprocessResult out;
    out.pinst = classify(c.inst, c.fm, t0, t1);
    out.split = std::move(c.split);
    const double budget = surplus_budget();
    for (const auto& [j, yj] : out.pinst.y) {
        if (yj > budget + 10.0 * kTol) {
            throw std::logic_error("first-class inflow at '" + j +
                                   "' exceeds the surplus budget");
        }
    }
    return out;
}

} // namespace stochmatch
