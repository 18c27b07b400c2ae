#include "stochmatch/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stochmatch {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json parse(const std::string& text) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& err) {
        throw std::invalid_argument(std::string("malformed JSON: ") +
                                    err.what());
    }
}

double number_field(const ordered_json& node, const char* key) {
    if (!node.contains(key) || !node[key].is_number()) {
        throw std::invalid_argument(std::string("expected numeric field '") +
                                    key + "'");
    }
    return node[key].get<double>();
}

std::string string_field(const ordered_json& node, const char* key) {
    if (!node.contains(key) || !node[key].is_string()) {
        throw std::invalid_argument(std::string("expected string field '") +
                                    key + "'");
    }
    return node[key].get<std::string>();
}

const ordered_json& array_field(const ordered_json& node, const char* key) {
    if (!node.contains(key) || !node[key].is_array()) {
        throw std::invalid_argument(std::string("expected array field '") +
                                    key + "'");
    }
    return node[key];
}

} // namespace

std::string to_json(const Instance& inst, int indent) {
    ordered_json doc;
    doc["online_types"] = ordered_json::array();
    for (const auto& type : inst.online_types) {
        ordered_json node;
        node["id"] = type.id;
        node["rate"] = type.rate;
        node["edges"] = ordered_json::array();
        for (const auto& edge : type.edges) {
            node["edges"].push_back(
                {{"offline", edge.offline}, {"weight", edge.weight}});
        }
        doc["online_types"].push_back(std::move(node));
    }
    doc["offline"] = inst.offline;
    return doc.dump(indent);
}

std::string to_json(const FractionalMatching& fm, int indent) {
    ordered_json doc;
    doc["x"] = ordered_json::array();
    for (const auto& entry : fm.x) {
        doc["x"].push_back(
            {{"i", entry.i}, {"j", entry.j}, {"flow", entry.flow}});
    }
    return doc.dump(indent);
}

std::string to_json(const SplitMap& split, int indent) {
    ordered_json doc = ordered_json::object();
    for (const auto& [parent, children] : split) {
        ordered_json list = ordered_json::array();
        for (const auto& child : children) {
            list.push_back({{"child", child.child}, {"rate", child.rate}});
        }
        doc[parent] = std::move(list);
    }
    return doc.dump(indent);
}

Instance instance_from_json(const std::string& text) {
    const ordered_json doc = parse(text);
    if (!doc.is_object()) {
        throw std::invalid_argument("instance document must be an object");
    }
    Instance inst;
    for (const auto& node : array_field(doc, "online_types")) {
        OnlineType type;
        type.id = string_field(node, "id");
        type.rate = number_field(node, "rate");
        for (const auto& edge_node : array_field(node, "edges")) {
            Edge edge;
            edge.offline = string_field(edge_node, "offline");
            edge.weight = number_field(edge_node, "weight");
            type.edges.push_back(std::move(edge));
        }
        inst.online_types.push_back(std::move(type));
    }
    for (const auto& node : array_field(doc, "offline")) {
        if (!node.is_string()) {
            throw std::invalid_argument("offline ids must be strings");
        }
        inst.offline.push_back(node.get<std::string>());
    }
    return inst;
}

FractionalMatching matching_from_json(const std::string& text) {
    const ordered_json doc = parse(text);
    if (!doc.is_object()) {
        throw std::invalid_argument("matching document must be an object");
    }
    FractionalMatching fm;
    for (const auto& node : array_field(doc, "x")) {
        FlowEntry entry;
        entry.i = string_field(node, "i");
        entry.j = string_field(node, "j");
        entry.flow = number_field(node, "flow");
        fm.x.push_back(std::move(entry));
    }
    return fm;
}

SplitMap split_map_from_json(const std::string& text) {
    const ordered_json doc = parse(text);
    if (!doc.is_object()) {
        throw std::invalid_argument("split map document must be an object");
    }
    SplitMap split;
    for (const auto& [parent, list] : doc.items()) {
        if (!list.is_array()) {
            throw std::invalid_argument("split map entry for '" + parent +
                                        "' must be an array");
        }
        std::vector<SplitChild> children;
        for (const auto& node : list) {
            SplitChild child;
            child.child = string_field(node, "child");
            child.rate = number_field(node, "rate");
            children.push_back(std::move(child));
        }
        split[parent] = std::move(children);
    }
    return split;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

Instance load_instance(const std::string& path) {
    return instance_from_json(read_file(path));
}

FractionalMatching load_matching(const std::string& path) {
    return matching_from_json(read_file(path));
}

SplitMap load_split_map(const std::string& path) {
    return split_map_from_json(read_file(path));
}

void save_instance(const std::string& path, const Instance& inst) {
    write_file(path, to_json(inst) + "\n");
}

void save_matching(const std::string& path, const FractionalMatching& fm) {
    write_file(path, to_json(fm) + "\n");
}

void save_split_map(const std::string& path, const SplitMap& split) {
    write_file(path, to_json(split) + "\n");
}

} // namespace stochmatch
