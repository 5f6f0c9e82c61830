#include "iclv/textio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "iclv/errors.hpp"

namespace iclv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void check_field(const std::string& field, const std::string& path) {
    if (field.find(',') != std::string::npos ||
        field.find('\n') != std::string::npos)
        throw SchemaError(path + ": field '" + field +
                          "' contains a separator; labels must stay plain");
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require_column(const std::string& name,
                             const std::string& context) const {
    const int idx = column(name);
    if (idx < 0)
        throw SchemaError(context + ": missing column '" + name + "'");
    return idx;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    CsvTable table;
    std::string line;
    long line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!have_header) table.comments.push_back(line.substr(1));
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw SchemaError(path + ", line " + std::to_string(line_no) +
                              ": expected " + std::to_string(table.header.size()) +
                              " fields, found " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw SchemaError(path + ": no header row");
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);  // binary keeps '\n' literal
    if (!out) throw SchemaError("cannot write " + path);
    for (const auto& c : table.comments) out << '#' << c << '\n';
    for (size_t i = 0; i < table.header.size(); ++i) {
        check_field(table.header[i], path);
        out << table.header[i]
            << (i + 1 == table.header.size() ? '\n' : ',');
    }
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw SchemaError(path + ": row width does not match the header");
        for (size_t i = 0; i < row.size(); ++i) {
            check_field(row[i], path);
            out << row[i] << (i + 1 == row.size() ? '\n' : ',');
        }
    }
}

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw SchemaError(context + ": '" + text + "' is not a number");
    return value;
}

long parse_integer(const std::string& text, const std::string& context) {
    long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw SchemaError(context + ": '" + text + "' is not an integer");
    return value;
}

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::map<std::string, std::string> cfg;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ", line " + std::to_string(line_no) +
                              ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string()
                                          : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ", line " + std::to_string(line_no) +
                              ": empty key");
        if (!cfg.emplace(key, value).second)
            throw ConfigError(path + ": duplicate key '" + key + "'");
    }
    return cfg;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const std::map<std::string, std::string>& cfg) {
    std::ostringstream canonical;  // std::map iterates in key order
    for (const auto& [key, value] : cfg) canonical << key << '=' << value << '\n';
    std::ostringstream hex;
    hex << std::hex << fnv1a(canonical.str());
    return hex.str();
}

}  // namespace iclv
