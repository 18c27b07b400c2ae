#include "stochmatch/instance.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stochmatch {

bool is_dummy_id(const std::string& id) {
    return id.rfind(kDummyPrefix, 0) == 0;
}

double Instance::total_rate() const {
    double sum = 0.0;
    for (const auto& type : online_types) sum += type.rate;
    return sum;
}

std::size_t Instance::online_index(const std::string& id) const {
    for (std::size_t k = 0; k < online_types.size(); ++k) {
        if (online_types[k].id == id) return k;
    }
    return npos;
}

std::size_t Instance::offline_index(const std::string& id) const {
    for (std::size_t k = 0; k < offline.size(); ++k) {
        if (offline[k] == id) return k;
    }
    return npos;
}

double Instance::edge_weight(const std::string& i, const std::string& j) const {
    const std::size_t k = online_index(i);
    if (k == npos) return 0.0;
    for (const auto& edge : online_types[k].edges) {
        if (edge.offline == j) return edge.weight;
    }
    return 0.0;
}

bool Instance::has_edge(const std::string& i, const std::string& j) const {
    const std::size_t k = online_index(i);
    if (k == npos) return false;
    for (const auto& edge : online_types[k].edges) {
        if (edge.offline == j) return true;
    }
    return false;
}

double FractionalMatching::flow(const std::string& i,
                                const std::string& j) const {
    for (const auto& entry : x) {
        if (entry.i == i && entry.j == j) return entry.flow;
    }
    return 0.0;
}

double FractionalMatching::online_mass(const std::string& i) const {
    double sum = 0.0;
    for (const auto& entry : x) {
        if (entry.i == i) sum += entry.flow;
    }
    return sum;
}

double FractionalMatching::offline_mass(const std::string& j) const {
    double sum = 0.0;
    for (const auto& entry : x) {
        if (entry.j == j) sum += entry.flow;
    }
    return sum;
}

double FractionalMatching::objective(const Instance& inst) const {
    double sum = 0.0;
    for (const auto& entry : x) {
        sum += inst.edge_weight(entry.i, entry.j) * entry.flow;
    }
    return sum;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (k > 0) out << '\n';
        out << errors[k];
    }
    return out.str();
}

ValidationReport validate_instance(const Instance& inst) {
    ValidationReport report;
    std::set<std::string> online_ids;
    for (const auto& type : inst.online_types) {
        if (type.id.empty()) report.fail("online type with empty id");
        if (!online_ids.insert(type.id).second) {
            report.fail("duplicate online type id '" + type.id + "'");
        }
        if (!(type.rate >= 0.0) || !std::isfinite(type.rate)) {
            report.fail("online type '" + type.id + "' has invalid rate");
        }
    }
    std::set<std::string> offline_ids;
    for (const auto& id : inst.offline) {
        if (id.empty()) report.fail("offline vertex with empty id");
        if (!offline_ids.insert(id).second) {
            report.fail("duplicate offline vertex id '" + id + "'");
        }
    }
    for (const auto& type : inst.online_types) {
        std::set<std::string> neighbors;
        for (const auto& edge : type.edges) {
            if (!offline_ids.count(edge.offline)) {
                report.fail("edge (" + type.id + ", " + edge.offline +
                            ") points at an unknown offline vertex");
            }
            if (!neighbors.insert(edge.offline).second) {
                report.fail("duplicate edge (" + type.id + ", " +
                            edge.offline + ")");
            }
            if (!(edge.weight >= 0.0) || !std::isfinite(edge.weight)) {
                report.fail("edge (" + type.id + ", " + edge.offline +
                            ") has invalid weight");
            }
        }
    }
    return report;
}

ValidationReport validate_matching_basic(const Instance& inst,
                                         const FractionalMatching& fm) {
    ValidationReport report;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& entry : fm.x) {
        if (!seen.insert({entry.i, entry.j}).second) {
            report.fail("duplicate flow entry (" + entry.i + ", " + entry.j +
                        ")");
        }
        if (!inst.has_edge(entry.i, entry.j)) {
            report.fail("flow on nonexistent edge (" + entry.i + ", " +
                        entry.j + ")");
        }
        if (!(entry.flow >= -kTol) || !std::isfinite(entry.flow)) {
            report.fail("negative flow on edge (" + entry.i + ", " + entry.j +
                        ")");
        }
    }
    for (const auto& type : inst.online_types) {
        const double mass = fm.online_mass(type.id);
        if (mass > type.rate + kTol) {
            report.fail("online mass " + std::to_string(mass) +
                        " exceeds rate of type '" + type.id + "'");
        }
    }
    for (const auto& j : inst.offline) {
        const double mass = fm.offline_mass(j);
        if (mass > 1.0 + kTol) {
            report.fail("offline mass " + std::to_string(mass) +
                        " exceeds 1 at vertex '" + j + "'");
        }
    }
    return report;
}

ValidationReport validate_matching(const Instance& inst,
                                   const FractionalMatching& fm) {
    ValidationReport report = validate_matching_basic(inst, fm);
    const double budget = surplus_budget();
    for (const auto& j : inst.offline) {
        double surplus = 0.0;
        for (const auto& type : inst.online_types) {
            const double xij = fm.flow(type.id, j);
            surplus += std::max(2.0 * xij - type.rate, 0.0);
        }
        if (surplus > budget + kTol) {
            report.fail("surplus " + std::to_string(surplus) +
                        " exceeds budget " + std::to_string(budget) +
                        " at vertex '" + j + "'");
        }
    }
    return report;
}

PreprocessedInstance classify(const Instance& inst,
                              const FractionalMatching& fm, double t0,
                              double t1) {
    if (!(0.0 <= t0 && t0 <= t1 && t1 <= 1.0)) {
        throw std::invalid_argument("need 0 <= t0 <= t1 <= 1");
    }
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
    PreprocessedInstance out;
    out.inst = inst;
    out.matching = fm;
    out.t0 = t0;
    out.t1 = t1;
    for (const auto& j : inst.offline) out.y[j] = 0.0;
    for (const auto& type : inst.online_types) {
        std::vector<FlowEntry> positive;
        for (const auto& entry : fm.x) {
            if (entry.i == type.id && entry.flow > kTol) {
                positive.push_back(entry);
            }
        }
        if (type.rate <= kTol) continue; // inert: never arrives
        EdgeClass cls;
        if (positive.size() == 1 &&
            std::abs(positive[0].flow - type.rate) <= kTol) {
            cls = EdgeClass::First;
        } else if (positive.size() == 2 &&
                   std::abs(positive[0].flow - type.rate / 2.0) <= kTol &&
                   std::abs(positive[1].flow - type.rate / 2.0) <= kTol) {
            cls = EdgeClass::Second;
        } else {
            throw std::invalid_argument(
                "type '" + type.id +
                "' is neither one full-rate edge nor two half-rate edges");
        }
        for (const auto& entry : positive) {
            ClassifiedEdge edge;
            edge.i = entry.i;
            edge.j = entry.j;
            edge.weight = inst.edge_weight(entry.i, entry.j);
            edge.flow = entry.flow;
            edge.cls = cls;
            out.edges.push_back(edge);
            if (cls == EdgeClass::First) out.y[edge.j] += edge.flow;
        }
    }
    return out;
}

} // namespace stochmatch
