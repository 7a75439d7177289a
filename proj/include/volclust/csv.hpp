#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace volclust::csv {

/// Writes header + numeric rows with '.' decimals and 17 significant digits.
class Writer {
public:
    Writer(std::ostream& os, std::vector<std::string> header);

    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);

private:
    std::ostream& os_;
    std::size_t columns_;
};

/// Formats one number the way Writer does.
std::string format(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a header column, or throws ConfigError.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

/// Reads a numeric CSV with a header row. Blank lines are skipped.
/// Throws ConfigError on missing files or unparsable cells.
Table read(const std::filesystem::path& path);
Table parse(std::istream& is, const std::string& origin = "<stream>");

} // namespace volclust::csv
