#pragma once

#include <string>

#include "stochmatch/instance.hpp"

namespace stochmatch {

/// JSON round-trips for the three on-disk formats. Serialization preserves
/// declaration order of fields and entries, so writing a parsed object back
/// reproduces an equivalent document byte for byte.
///
/// Parsing throws std::invalid_argument on malformed JSON or on a document
/// that does not match the expected shape; the file helpers throw
/// std::runtime_error when the file cannot be read or written.

std::string to_json(const Instance& inst, int indent = 2);
std::string to_json(const FractionalMatching& fm, int indent = 2);
std::string to_json(const SplitMap& split, int indent = 2);

Instance instance_from_json(const std::string& text);
FractionalMatching matching_from_json(const std::string& text);
SplitMap split_map_from_json(const std::string& text);

/// Reads a whole file into memory.
std::string read_file(const std::string& path);

/// Writes text to a file, creating or truncating it.
void write_file(const std::string& path, const std::string& text);

Instance load_instance(const std::string& path);
FractionalMatching load_matching(const std::string& path);
SplitMap load_split_map(const std::string& path);

void save_instance(const std::string& path, const Instance& inst);
void save_matching(const std::string& path, const FractionalMatching& fm);
void save_split_map(const std::string& path, const SplitMap& split);

} // namespace stochmatch
