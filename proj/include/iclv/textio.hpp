#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace iclv {

// Minimal comma-separated table: leading '#' lines are carried as comments,
// the first non-comment line is the header, and fields must not themselves
// contain commas or newlines (labels in this project are snake_case on
// purpose).  Line endings are always '\n' so emitted bytes are stable.
struct CsvTable {
    std::vector<std::string> comments;  // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // column index by header name, -1 when absent
    int column(const std::string& name) const;
    // same, but missing columns throw SchemaError naming the file context
    int require_column(const std::string& name, const std::string& context) const;
};

// Throws SchemaError when the file cannot be opened or a row's field count
// differs from the header's.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Shortest decimal form that parses back to the same double; integers drop
// the trailing ".0" the way std::to_chars emits them.
std::string format_number(double value);

// Strict numeric parsing; `context` names the file/row/column in the error.
double parse_number(const std::string& text, const std::string& context);
long parse_integer(const std::string& text, const std::string& context);

// Flat key=value configuration with '#' comments and blank lines; duplicate
// keys are a ConfigError (silent last-wins hides typos).
std::map<std::string, std::string> read_config(const std::string& path);

// Canonical fingerprint of an effective configuration: keys sorted, joined
// as key=value lines, FNV-1a hashed.  Recorded in every output header.
std::uint64_t fnv1a(std::string_view bytes);
std::string config_hash(const std::map<std::string, std::string>& cfg);

}  // namespace iclv
