#include "banlin/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "banlin/errors.hpp"

namespace banlin {

std::vector<Vec> parse_csv_rows(const std::string& text) {
    std::vector<Vec> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Vec row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw ConfigError("csv: cannot parse '" + cell + "' as a number");
            }
            while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
            if (pos != cell.size()) throw ConfigError("csv: trailing junk in cell '" + cell + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("csv: inconsistent row width");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Vec> load_csv_rows(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("csv: cannot open '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_csv_rows(buf.str());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace banlin
