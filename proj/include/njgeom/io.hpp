#ifndef NJGEOM_IO_HPP
#define NJGEOM_IO_HPP

#include "njgeom/distvec.hpp"
#include "njgeom/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace njgeom {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact value of a decimal ("-1.25", "3e-2") or fraction ("7/2") literal.
inline Rational parse_rational(const std::string& text) {
    std::string s = text;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    auto bad = [&]() { return InputError("not a number: '" + text + "'"); };
    if (s.empty()) throw bad();
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const Rational num = parse_rational(s.substr(0, slash)), den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw bad();
        return num / den;
    }
    std::size_t k = 0;
    bool negative = false;
    if (s[k] == '+' || s[k] == '-') negative = s[k++] == '-';
    std::string digits;
    long scale = 0;
    bool any = false, dot = false;
    for (; k < s.size() && (std::isdigit(static_cast<unsigned char>(s[k])) || s[k] == '.'); ++k) {
        if (s[k] == '.') {
            if (dot) throw bad();
            dot = true;
            continue;
        }
        digits += s[k];
        any = true;
        if (dot) --scale;
    }
    if (!any) throw bad();
    if (k < s.size() && (s[k] == 'e' || s[k] == 'E')) {
        ++k;
        std::size_t used = 0;
        long e = 0;
        try {
            e = std::stol(s.substr(k), &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used == 0 || std::abs(e) > 4000) throw bad();
        k += used;
        scale += e;
    }
    if (k != s.size()) throw bad();
    Rational v(mpz_class(digits, 10));
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(scale)));
    if (scale >= 0) v *= Rational(p10);
    else v /= Rational(p10);
    return negative ? Rational(-v) : v;
}

struct LabeledDistances {
    std::vector<std::string> labels;
    DissimilarityVector<Rational> d;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') cur += c;
    }
    out.push_back(cur);
    for (auto& f : out) {
        f.erase(0, f.find_first_not_of(" \t"));
        f.erase(f.find_last_not_of(" \t") + 1);
    }
    return out;
}

inline bool blank_or_comment(const std::string& line) {
    const auto p = line.find_first_not_of(" \t\r");
    return p == std::string::npos || line[p] == '#';
}

/// Equal within a relative 1e-12.
inline bool nearly_equal(const Rational& x, const Rational& y) {
    const Rational diff = abs(x - y);
    const Rational scale = std::max(abs(x), abs(y));
    return diff == 0 || diff <= scale / 1000000000000;
}

}  // namespace detail

/// Lower-triangle CSV, one "a,b,value" row per pair. Taxa are numbered in order of first
/// appearance. A pair may appear in both orders with equal values; "a,a,0" rows are allowed.
inline LabeledDistances read_distance_csv(std::istream& is) {
    std::vector<std::string> labels;
    std::map<std::string, int> index;
    std::map<std::pair<int, int>, Rational> values;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) { return InputError("line " + std::to_string(lineno) + ": " + msg); };
    auto id = [&](const std::string& name) {
        auto [it, fresh] = index.emplace(name, static_cast<int>(labels.size()));
        if (fresh) labels.push_back(name);
        return it->second;
    };
    bool first_row = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (detail::blank_or_comment(line)) continue;
        const bool header_allowed = std::exchange(first_row, false);
        const auto f = detail::split_csv(line);
        if (f.size() != 3) throw fail("expected 'a,b,value'");
        Rational v;
        try {
            v = parse_rational(f[2]);
        } catch (const InputError&) {
            if (header_allowed) continue;  // header row
            throw fail("value '" + f[2] + "' is not a number");
        }
        if (f[0].empty() || f[1].empty()) throw fail("empty taxon name");
        const int a = id(f[0]), b = id(f[1]);
        if (a == b) {
            if (v != 0) throw fail("diagonal entry for '" + f[0] + "' is not zero");
            continue;
        }
        const auto key = std::minmax(a, b);
        auto [it, fresh] = values.emplace(key, v);
        if (!fresh && !detail::nearly_equal(it->second, v)) throw fail("pair " + f[0] + "," + f[1] + " given twice with different values");
    }
    const int n = static_cast<int>(labels.size());
    if (n < 3) throw InputError("distance file names fewer than 3 taxa");
    LabeledDistances out{labels, DissimilarityVector<Rational>(n)};
    for (int a = 1; a < n; ++a)
        for (int b = 0; b < a; ++b) {
            const auto it = values.find({b, a});
            if (it == values.end()) throw InputError("distance file lacks the pair " + labels[static_cast<std::size_t>(b)] + "," + labels[static_cast<std::size_t>(a)]);
            out.d(a, b) = it->second;
        }
    return out;
}

/// Square PHYLIP matrix: first token n, then n rows "name v_1 ... v_n".
inline LabeledDistances read_phylip(std::istream& is) {
    int n = 0;
    if (!(is >> n) || n < 3) throw InputError("phylip: first token must be the taxon count (>= 3)");
    LabeledDistances out{{}, DissimilarityVector<Rational>(n)};
    std::vector<std::vector<Rational>> m(static_cast<std::size_t>(n), std::vector<Rational>(static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a) {
        std::string name;
        if (!(is >> name)) throw InputError("phylip: missing row " + std::to_string(a + 1));
        out.labels.push_back(name);
        for (int b = 0; b < n; ++b) {
            std::string tok;
            if (!(is >> tok)) throw InputError("phylip: row '" + name + "' has fewer than " + std::to_string(n) + " values");
            m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = parse_rational(tok);
        }
    }
    std::string extra;
    if (is >> extra) throw InputError("phylip: unexpected trailing token '" + extra + "'");
    for (int a = 0; a < n; ++a) {
        if (m[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] != 0) throw InputError("phylip: nonzero diagonal for '" + out.labels[static_cast<std::size_t>(a)] + "'");
        for (int b = 0; b < a; ++b) {
            const auto& x = m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            if (!detail::nearly_equal(x, m[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]))
                throw InputError("phylip: matrix not symmetric at " + out.labels[static_cast<std::size_t>(b)] + "," + out.labels[static_cast<std::size_t>(a)]);
            out.d(a, b) = x;
        }
    }
    return out;
}

enum class DistanceFormat { automatic, csv, phylip };

inline DistanceFormat parse_distance_format(const std::string& s) {
    if (s == "auto") return DistanceFormat::automatic;
    if (s == "csv") return DistanceFormat::csv;
    if (s == "phylip") return DistanceFormat::phylip;
    throw std::invalid_argument("unknown distance format '" + s + "' (csv, phylip, auto)");
}

/// Reads a distance file; the automatic format is PHYLIP when the first token is a bare integer.
inline LabeledDistances read_distances(const std::string& path, DistanceFormat format = DistanceFormat::automatic) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (format == DistanceFormat::automatic) {
        std::istringstream probe(text);
        std::string first;
        probe >> first;
        format = !first.empty() && std::all_of(first.begin(), first.end(), [](unsigned char c) { return std::isdigit(c); })
                     ? DistanceFormat::phylip
                     : DistanceFormat::csv;
    }
    std::istringstream is(text);
    try {
        return format == DistanceFormat::phylip ? read_phylip(is) : read_distance_csv(is);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

struct VectorRow {
    std::string id;
    DissimilarityVector<double> d;
};

/// Table of dissimilarity vectors: a header whose first column names the row id and whose
/// columns "dXY" (X < Y, single digits) give the entries. Other columns are ignored, so
/// the records file of a simulation can be read back directly.
inline std::vector<VectorRow> read_vector_table(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!detail::blank_or_comment(line)) break;
    }
    const auto header = detail::split_csv(line);
    std::vector<std::pair<int, int>> cols(header.size(), {-1, -1});
    int n = 0;
    std::size_t found = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto& h = header[c];
        if (h.size() == 3 && h[0] == 'd' && std::isdigit(static_cast<unsigned char>(h[1])) && std::isdigit(static_cast<unsigned char>(h[2]))) {
            const int x = h[1] - '0', y = h[2] - '0';
            if (x >= y) throw InputError("vector table: column '" + h + "' must name a pair dXY with X < Y");
            cols[c] = {x, y};
            n = std::max(n, y + 1);
            ++found;
        }
    }
    if (n < 4 || found != pair_count(n)) throw InputError("vector table: header must contain every column dXY for 0 <= X < Y < n, n >= 4");
    std::vector<VectorRow> rows;
    while (std::getline(is, line)) {
        ++lineno;
        if (detail::blank_or_comment(line)) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != header.size()) throw InputError("vector table line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
        VectorRow r{f[0], DissimilarityVector<double>(n)};
        for (std::size_t c = 1; c < f.size(); ++c) {
            if (cols[c].first < 0) continue;
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(f[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != f[c].size()) throw InputError("vector table line " + std::to_string(lineno) + ": bad number '" + f[c] + "'");
            r.d(cols[c].second, cols[c].first) = v;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace njgeom

#endif  // NJGEOM_IO_HPP
