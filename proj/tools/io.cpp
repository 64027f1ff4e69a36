#include "novelty/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "novelty/errors.hpp"

namespace novelty::io {

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
    return std::string(buffer, result.ptr);
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open config file '" + path.string() + "'");
    }
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

ObjectReader::ObjectReader(const Json& source, std::string path)
    : source_(source), path_(std::move(path)) {
    if (!source_.is_object()) {
        throw UsageError(path_ + " must be a JSON object");
    }
}

std::string ObjectReader::where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
}

bool ObjectReader::has(const std::string& key) const { return source_.contains(key); }

const Json& ObjectReader::take(const std::string& key) {
    if (!source_.contains(key)) {
        throw UsageError("missing required key '" + where(key) + "'");
    }
    seen_.push_back(key);
    return source_.at(key);
}

double ObjectReader::number(const std::string& key) {
    const Json& value = take(key);
    if (!value.is_number()) {
        throw UsageError("'" + where(key) + "' must be a number");
    }
    const double x = value.get<double>();
    resolved_[key] = x;
    return x;
}

double ObjectReader::number(const std::string& key, double fallback) {
    if (!has(key)) {
        resolved_[key] = fallback;
        return fallback;
    }
    return number(key);
}

long long ObjectReader::integer(const std::string& key) {
    const Json& value = take(key);
    if (!value.is_number_integer()) {
        throw UsageError("'" + where(key) + "' must be an integer");
    }
    const long long x = value.get<long long>();
    resolved_[key] = x;
    return x;
}

long long ObjectReader::integer(const std::string& key, long long fallback) {
    if (!has(key)) {
        resolved_[key] = fallback;
        return fallback;
    }
    return integer(key);
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) {
        resolved_[key] = fallback;
        return fallback;
    }
    const Json& value = take(key);
    if (!value.is_number_unsigned()) {
        throw UsageError("'" + where(key) + "' must be a nonnegative integer");
    }
    const auto x = value.get<std::uint64_t>();
    resolved_[key] = x;
    return x;
}

std::string ObjectReader::text(const std::string& key) {
    const Json& value = take(key);
    if (!value.is_string()) {
        throw UsageError("'" + where(key) + "' must be a string");
    }
    std::string s = value.get<std::string>();
    resolved_[key] = s;
    return s;
}

std::string ObjectReader::text(const std::string& key, const std::string& fallback) {
    if (!has(key)) {
        resolved_[key] = fallback;
        return fallback;
    }
    return text(key);
}

bool ObjectReader::flag(const std::string& key, bool fallback) {
    if (!has(key)) {
        resolved_[key] = fallback;
        return fallback;
    }
    const Json& value = take(key);
    if (!value.is_boolean()) {
        throw UsageError("'" + where(key) + "' must be true or false");
    }
    resolved_[key] = value.get<bool>();
    return value.get<bool>();
}

namespace {

Eigen::VectorXd parse_vector(const Json& value, const std::string& where) {
    if (!value.is_array()) {
        throw UsageError("'" + where + "' must be a list of numbers");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number()) {
            throw UsageError("'" + where + "' must be a list of numbers");
        }
        v[static_cast<Eigen::Index>(i)] = value[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd parse_matrix(const Json& value, const std::string& where) {
    if (!value.is_array() || value.empty()) {
        throw UsageError("'" + where + "' must be a nonempty list of rows");
    }
    if (!value[0].is_array()) {
        return parse_vector(value, where).transpose();
    }
    const std::size_t cols = value[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(value.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < value.size(); ++i) {
        const Eigen::VectorXd row = parse_vector(value[i], where);
        if (static_cast<std::size_t>(row.size()) != cols) {
            throw UsageError("'" + where + "' has rows of different lengths");
        }
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

}  // namespace

Eigen::VectorXd ObjectReader::vector(const std::string& key) {
    const Json& value = take(key);
    Eigen::VectorXd v = parse_vector(value, where(key));
    resolved_[key] = value;
    return v;
}

Eigen::MatrixXd ObjectReader::matrix(const std::string& key) {
    const Json& value = take(key);
    Eigen::MatrixXd m = parse_matrix(value, where(key));
    resolved_[key] = value;
    return m;
}

std::vector<Eigen::MatrixXd> ObjectReader::matrices(const std::string& key) {
    const Json& value = take(key);
    if (!value.is_array() || value.empty()) {
        throw UsageError("'" + where(key) + "' must be a nonempty list of matrices");
    }
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(parse_matrix(value[i], where(key) + "[" + std::to_string(i) + "]"));
    }
    resolved_[key] = value;
    return out;
}

std::vector<long long> ObjectReader::integers(const std::string& key) {
    const Json& value = take(key);
    if (!value.is_array() || value.empty()) {
        throw UsageError("'" + where(key) + "' must be a nonempty list of integers");
    }
    std::vector<long long> out;
    for (const auto& item : value) {
        if (!item.is_number_integer()) {
            throw UsageError("'" + where(key) + "' must be a nonempty list of integers");
        }
        out.push_back(item.get<long long>());
    }
    resolved_[key] = value;
    return out;
}

std::vector<std::string> ObjectReader::strings(const std::string& key) {
    const Json& value = take(key);
    if (!value.is_array() || value.empty()) {
        throw UsageError("'" + where(key) + "' must be a nonempty list of strings");
    }
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string()) {
            throw UsageError("'" + where(key) + "' must be a nonempty list of strings");
        }
        out.push_back(item.get<std::string>());
    }
    resolved_[key] = value;
    return out;
}

ObjectReader ObjectReader::child(const std::string& key) {
    return ObjectReader(take(key), where(key));
}

ObjectReader ObjectReader::child_or_empty(const std::string& key) {
    if (!has(key)) {
        return ObjectReader(Json::object(), where(key));
    }
    return child(key);
}

void ObjectReader::adopt(const std::string& key, Json resolved) { resolved_[key] = std::move(resolved); }

Json ObjectReader::finish() {
    std::vector<std::string> unknown;
    for (const auto& item : source_.items()) {
        if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end()) {
            unknown.push_back(where(item.key()));
        }
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) {
            list += (list.empty() ? "" : ", ") + k;
        }
        throw UsageError("unknown config key(s): " + list);
    }
    return resolved_;
}

Json to_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Json to_json(const Eigen::MatrixXd& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    }
    return out;
}

CsvTable::CsvTable(const Json& provenance, std::vector<std::string> columns)
    : width_(columns.size()) {
    text_ = "# provenance: " + provenance.dump() + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        text_ += (i ? "," : "") + columns[i];
    }
    text_ += '\n';
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw ShapeError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(width_));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        text_ += (i ? "," : "") + cells[i];
    }
    text_ += '\n';
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (const double x : values) {
        cells.push_back(format_number(x));
    }
    add_row(cells);
}

std::string CsvTable::str() const { return text_; }

void OutputBundle::add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
}

void OutputBundle::add_json(std::string name, const Json& value) {
    add(std::move(name), value.dump(2) + "\n");
}

void OutputBundle::commit(const std::filesystem::path& directory) const {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw UsageError("cannot create output directory '" + directory.string() + "': " + ec.message());
    }
    const std::string suffix = ".tmp" + std::to_string(::getpid());
    std::vector<std::filesystem::path> staged;
    for (const auto& [name, content] : files_) {
        const std::filesystem::path tmp = directory / (name + suffix);
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        out.close();
        if (!out) {
            for (const auto& p : staged) {
                std::filesystem::remove(p, ec);
            }
            std::filesystem::remove(tmp, ec);
            throw UsageError("cannot write '" + tmp.string() + "'");
        }
        staged.push_back(tmp);
    }
    for (std::size_t i = 0; i < files_.size(); ++i) {
        std::filesystem::rename(staged[i], directory / files_[i].first);
    }
}

}  // namespace novelty::io
