#include "krausfold/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kf {

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

double finite_number(const json &v, const std::string &where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(where + ": non-finite number");
    return x;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

KrausSet parse_kraus_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error &e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                             ": " + e.what(),
                         line, col);
    } catch (const json::out_of_range &e) {
        throw ParseError(std::string("non-finite or out-of-range number: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level must be an object");
    if (!doc.contains("dim") || !doc["dim"].is_number_integer()) throw ParseError("\"dim\" must be an integer");
    const auto dim = doc["dim"].get<long long>();
    if (dim != 2 && dim != 3) throw ParseError("\"dim\" must be 2 or 3");
    if (!doc.contains("operators") || !doc["operators"].is_array())
        throw ParseError("\"operators\" must be an array");

    const auto d = static_cast<std::size_t>(dim);
    std::vector<Matrix> ops;
    std::size_t k = 0;
    for (const auto &op : doc["operators"]) {
        ++k;
        const std::string where = "operator " + std::to_string(k);
        if (!op.is_array() || op.size() != d) throw ParseError(where + ": expected " + std::to_string(d) + " rows");
        Matrix m(d, d);
        for (std::size_t r = 0; r < d; ++r) {
            const auto &row = op[r];
            if (!row.is_array() || row.size() != d)
                throw ParseError(where + ", row " + std::to_string(r + 1) + ": expected " + std::to_string(d) +
                                 " entries");
            for (std::size_t c = 0; c < d; ++c) {
                const auto &z = row[c];
                const std::string at = where + ", entry (" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")";
                if (!z.is_array() || z.size() != 2) throw ParseError(at + ": expected [re, im]");
                m(r, c) = Complex(finite_number(z[0], at), finite_number(z[1], at));
            }
        }
        ops.push_back(std::move(m));
    }
    return KrausSet(d, ops);
}

KrausSet load_kraus_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_kraus_json(ss.str());
}

std::string to_kraus_json(const KrausSet &s) {
    std::string out = "{\"dim\": " + std::to_string(s.dim()) + ", \"operators\": [";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += k ? ",\n  [" : "\n  [";
        const Matrix &m = s[k].matrix();
        for (std::size_t r = 0; r < m.rows(); ++r) {
            out += r ? ", [" : "[";
            for (std::size_t c = 0; c < m.cols(); ++c) {
                if (c) out += ", ";
                out += "[" + format_double(m(r, c).real()) + ", " + format_double(m(r, c).imag()) + "]";
            }
            out += "]";
        }
        out += "]";
    }
    out += s.size() ? "\n]}\n" : "]}\n";
    return out;
}

void save_kraus_file(const KrausSet &s, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_kraus_json(s);
}

}  // namespace kf
