#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace novelty::io {

using Json = nlohmann::ordered_json;

// Shortest decimal that round-trips, '.' separator regardless of locale.
std::string format_number(double x);

Json read_json_file(const std::filesystem::path& path);

// Walks one JSON object, records every value it hands out (defaults included)
// into a resolved copy, and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const Json& source, std::string path);

    bool has(const std::string& key) const;

    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    long long integer(const std::string& key);
    long long integer(const std::string& key, long long fallback);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
    std::string text(const std::string& key);
    std::string text(const std::string& key, const std::string& fallback);
    bool flag(const std::string& key, bool fallback);

    Eigen::VectorXd vector(const std::string& key);
    // Rows of equal length; a flat list is read as a single row.
    Eigen::MatrixXd matrix(const std::string& key);
    std::vector<Eigen::MatrixXd> matrices(const std::string& key);
    std::vector<long long> integers(const std::string& key);
    std::vector<std::string> strings(const std::string& key);

    ObjectReader child(const std::string& key);
    // Empty object when absent.
    ObjectReader child_or_empty(const std::string& key);
    // Stores the resolved form of a child read through child().
    void adopt(const std::string& key, Json resolved);

    // Throws UsageError naming unknown keys; returns the resolved object.
    Json finish();

    const std::string& path() const noexcept { return path_; }

private:
    const Json& take(const std::string& key);
    std::string where(const std::string& key) const;

    Json source_;
    std::string path_;
    Json resolved_ = Json::object();
    std::vector<std::string> seen_;
};

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);  // list of rows

// Comma-separated table whose first line is "# provenance: <json>".
class CsvTable {
public:
    CsvTable(const Json& provenance, std::vector<std::string> columns);
    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);
    std::string str() const;

private:
    std::string text_;
    std::size_t width_;
};

// Files staged in memory and written on commit: each lands as a temporary
// sibling first and is renamed into place, so a failed run leaves nothing.
class OutputBundle {
public:
    void add(std::string name, std::string content);
    void add_json(std::string name, const Json& value);
    void commit(const std::filesystem::path& directory) const;
    const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace novelty::io
