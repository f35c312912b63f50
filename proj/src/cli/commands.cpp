#include "krausfold/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "krausfold/bloch.hpp"
#include "krausfold/json_io.hpp"

namespace kf::cli {

namespace {

using nlohmann::json;

const double kSqrt3 = std::sqrt(3.0);

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// JSON has no infinities; they are reported as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

CommandResult input_error(const std::string &what) {
    CommandResult r;
    r.exit_code = kExitInputError;
    r.diagnostic = what;
    r.report = {{"error", what}};
    return r;
}

std::string parse_error_text(const ParseError &e) {
    std::string s = e.what();
    if (e.line() > 0) s += " (line " + std::to_string(e.line()) + ", column " + std::to_string(e.column()) + ")";
    return s;
}

struct LoadedSet {
    KrausSet set;
    std::string digest;
};

/// Reads and parses a Kraus file; on failure fills `err` and returns nullopt.
std::optional<LoadedSet> load(const std::filesystem::path &path, CommandResult &err) {
    try {
        const std::string text = read_file(path);
        return LoadedSet{parse_kraus_json(text), fnv1a_hex(text)};
    } catch (const ParseError &e) {
        err = input_error(parse_error_text(e));
    } catch (const std::exception &e) {
        err = input_error(e.what());
    }
    return std::nullopt;
}

json signature_json(const std::optional<Signature> &sig) {
    if (!sig) return nullptr;
    json rows = json::array();
    for (int r : sig->rows) rows.push_back(r == Signature::kZeroColumn ? json(nullptr) : json(r + 1));
    return rows;
}

json class_json(const std::optional<Signature> &sig, Regime r) {
    if (!sig) return nullptr;
    const auto c = class_of(*sig, r);
    return c ? json(c->index) : json(nullptr);
}

json step_json(const StepLog &l) {
    return {{"group", l.group},
            {"action", std::string(step_action_name(l.action))},
            {"count_before", l.count_before},
            {"count_after", l.count_after},
            {"choi_distance", number(l.choi_distance)},
            {"detail", l.detail}};
}

// --- SVG -------------------------------------------------------------------

struct Frame {
    double lo_x, hi_x, lo_y, hi_y;
    static constexpr double kSize = 480.0, kPad = 40.0;
    double x(double v) const { return kPad + (v - lo_x) / (hi_x - lo_x) * kSize; }
    double y(double v) const { return kPad + (hi_y - v) / (hi_y - lo_y) * kSize; }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_svg(const std::filesystem::path &path, const RegionArgs &a, const RegionResult &res) {
    const int ci = a.i - 1, cj = a.j - 1;
    const double ti = std::abs(a.ti), tj = std::abs(a.tj);
    double ext_x = 0.0, ext_y = 0.0;
    for (const auto &p : res.points) {
        ext_x = std::max(ext_x, std::abs(p.m[ci]));
        ext_y = std::max(ext_y, std::abs(p.m[cj]));
    }
    const bool box = ci < 6 && cj >= 6;
    const bool disk = ci < 6 && cj == ci + 3;
    const bool diamond = ci < 6 && cj < 6 && !disk;
    const bool line = ci == 6 && cj == 7;
    double y_lo = 0.0, y_hi = 0.0;
    if (box) {
        if (cj == 6) {
            y_lo = (1.0 - kSqrt3) / 3.0;
            y_hi = 2.0 / kSqrt3;
        } else {
            y_lo = -2.0 * kSqrt3 / 3.0;
            y_hi = 2.0 * kSqrt3 / 3.0;
        }
        ext_x = std::max(ext_x, ti);
        ext_y = std::max({ext_y, std::abs(y_lo), std::abs(y_hi)});
    } else if (disk) {
        ext_x = ext_y = std::max({ext_x, ext_y, std::hypot(ti, tj)});
    } else if (diamond) {
        ext_x = ext_y = std::max({ext_x, ext_y, ti + tj});
    } else if (line) {
        ext_x = std::max(ext_x, 2.0 / kSqrt3);
        ext_y = std::max(ext_y, 2.0 / kSqrt3);
    }
    ext_x = ext_x > 0.0 ? 1.1 * ext_x : 1.0;
    ext_y = ext_y > 0.0 ? 1.1 * ext_y : 1.0;
    const Frame f{-ext_x, ext_x, -ext_y, ext_y};
    const double total = Frame::kSize + 2.0 * Frame::kPad;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(total) << "\" height=\"" << fmt(total)
        << "\" viewBox=\"0 0 " << fmt(total) << ' ' << fmt(total) << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << fmt(total) << "\" height=\"" << fmt(total) << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << fmt(f.x(f.lo_x)) << "\" y1=\"" << fmt(f.y(0)) << "\" x2=\"" << fmt(f.x(f.hi_x))
        << "\" y2=\"" << fmt(f.y(0)) << "\" stroke=\"#999\"/>\n";
    out << "<line x1=\"" << fmt(f.x(0)) << "\" y1=\"" << fmt(f.y(f.lo_y)) << "\" x2=\"" << fmt(f.x(0))
        << "\" y2=\"" << fmt(f.y(f.hi_y)) << "\" stroke=\"#999\"/>\n";
    out << "<g fill=\"#1f77b4\" fill-opacity=\"0.4\">\n";
    for (const auto &p : res.points)
        out << "<circle cx=\"" << fmt(f.x(p.m[ci])) << "\" cy=\"" << fmt(f.y(p.m[cj])) << "\" r=\"1.2\"/>\n";
    out << "</g>\n";
    const char *bound = "fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"";
    if (box) {
        out << "<rect x=\"" << fmt(f.x(-ti)) << "\" y=\"" << fmt(f.y(y_hi)) << "\" width=\"" << fmt(f.x(ti) - f.x(-ti))
            << "\" height=\"" << fmt(f.y(y_lo) - f.y(y_hi)) << "\" " << bound << "/>\n";
    } else if (disk) {
        const double r = std::hypot(ti, tj);
        out << "<ellipse cx=\"" << fmt(f.x(0)) << "\" cy=\"" << fmt(f.y(0)) << "\" rx=\"" << fmt(f.x(r) - f.x(0))
            << "\" ry=\"" << fmt(f.y(0) - f.y(r)) << "\" " << bound << "/>\n";
    } else if (diamond) {
        const double s = ti + tj;
        out << "<polygon points=\"" << fmt(f.x(s)) << ',' << fmt(f.y(0)) << ' ' << fmt(f.x(0)) << ',' << fmt(f.y(s))
            << ' ' << fmt(f.x(-s)) << ',' << fmt(f.y(0)) << ' ' << fmt(f.x(0)) << ',' << fmt(f.y(-s)) << "\" "
            << bound << "/>\n";
    } else if (line) {
        auto yl = [](double x) { return kSqrt3 * x + 2.0 * kSqrt3 / 3.0; };
        out << "<line x1=\"" << fmt(f.x(f.lo_x)) << "\" y1=\"" << fmt(f.y(yl(f.lo_x))) << "\" x2=\""
            << fmt(f.x(f.hi_x)) << "\" y2=\"" << fmt(f.y(yl(f.hi_x))) << "\" " << bound << "/>\n";
    }
    out << "<text x=\"" << fmt(Frame::kPad) << "\" y=\"" << fmt(Frame::kPad - 12) << "\" font-size=\"14\">m" << a.i
        << " vs m" << a.j << " (" << (a.kind == ChannelKind::SIO ? "SIO" : "IO") << ", n=" << res.points.size()
        << ")</text>\n";
    out << "</svg>\n";
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::optional<std::pair<int, int>> parse_section(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto parse_int = [](std::string_view s) -> std::optional<int> {
        if (s.size() != 1 || s[0] < '1' || s[0] > '8') return std::nullopt;
        return s[0] - '0';
    };
    const auto i = parse_int(text.substr(0, comma));
    const auto j = parse_int(text.substr(comma + 1));
    if (!i || !j || *i == *j) return std::nullopt;
    return std::make_pair(std::min(*i, *j), std::max(*i, *j));
}

CommandResult cmd_verify(const std::filesystem::path &path) {
    CommandResult res;
    const auto loaded = load(path, res);
    if (!loaded) return res;
    const KrausSet &s = loaded->set;

    const double defect = completeness_defect(s);
    const bool cptp = defect <= kCompletenessTol;
    bool all_incoherent = true, all_strict = true;
    json ops = json::array();
    for (std::size_t k = 0; k < s.size(); ++k) {
        const Matrix &m = s[k].matrix();
        const auto sig = signature_of(m);
        const bool inc = sig.has_value();
        const bool strict = inc && is_strictly_incoherent(m);
        all_incoherent = all_incoherent && inc;
        all_strict = all_strict && strict;
        json op = {{"index", k + 1},
                   {"incoherent", inc},
                   {"strictly_incoherent", strict},
                   {"signature", signature_json(sig)}};
        if (!inc) op["diagnostic"] = "NotIncoherent";
        if (s.dim() == 2) {
            op["class_qubit"] = class_json(sig, Regime::Qubit5);
        } else {
            op["class_qutrit_io"] = class_json(sig, Regime::QutritIO39);
            op["class_qutrit_sio"] = class_json(sig, Regime::QutritSIO15);
        }
        ops.push_back(std::move(op));
    }
    const bool pass = cptp && all_incoherent;
    res.report = {{"input_digest", loaded->digest},
                  {"dim", s.dim()},
                  {"op_count", s.size()},
                  {"completeness_defect", defect},
                  {"cptp", cptp},
                  {"all_incoherent", all_incoherent},
                  {"strictly_incoherent", all_strict},
                  {"operators", std::move(ops)},
                  {"pass", pass}};
    if (!pass) {
        res.exit_code = kExitVerifyFailed;
        res.diagnostic = !cptp ? "set is not trace preserving (defect " + format_double(defect) + ")"
                               : "set contains operators that are not incoherent";
    }
    return res;
}

CommandResult cmd_reduce(const std::filesystem::path &path, std::string_view regime_text,
                         const std::optional<std::filesystem::path> &out) {
    const auto regime = parse_regime(regime_text);
    if (!regime) return input_error("unknown regime '" + std::string(regime_text) + "'");
    CommandResult res;
    const auto loaded = load(path, res);
    if (!loaded) return res;
    const KrausSet &s = loaded->set;

    auto mismatch = [&](const std::string &why) {
        res.exit_code = kExitVerifyFailed;
        res.diagnostic = why;
        res.report = {{"input_digest", loaded->digest}, {"regime", std::string(regime_name(*regime))}, {"error", why}};
        return res;
    };
    if (s.dim() != regime_dim(*regime))
        return mismatch("dimension " + std::to_string(s.dim()) + " does not match regime " +
                        std::string(regime_name(*regime)));
    if (!is_channel(s)) return mismatch("input is not trace preserving");

    ReductionOutcome o;
    try {
        o = reduce(s, *regime);
    } catch (const std::invalid_argument &e) {
        return mismatch(e.what());
    }
    json log = json::array();
    for (const auto &l : o.log) log.push_back(step_json(l));
    res.report = {{"input_digest", loaded->digest},
                  {"regime", std::string(regime_name(*regime))},
                  {"op_count_before", o.op_count_before},
                  {"op_count_after", o.op_count_after},
                  {"choi_distance", number(o.choi_distance)},
                  {"all_incoherent", o.all_incoherent},
                  {"strictly_incoherent", o.strictly_incoherent},
                  {"status", std::string(reduction_status_name(o.status))},
                  {"log", std::move(log)}};
    if (out) {
        try {
            save_kraus_file(o.result, *out);
        } catch (const std::exception &e) {
            return input_error(e.what());
        }
        res.report["output"] = out->string();
    }
    if (o.status == ReductionStatus::NotReduced) {
        res.exit_code = kExitNotReduced;
        res.diagnostic = "reduction stopped at " + std::to_string(o.op_count_after) + " operators (bound " +
                         std::to_string(reduced_bound(*regime)) + ")";
        for (const auto &l : o.log)
            if (l.action == StepAction::Failed) res.diagnostic += "\n  " + l.group + ": " + l.detail;
    }
    return res;
}

CommandResult cmd_region(const RegionArgs &a) {
    if (a.i < 1 || a.i > 8 || a.j < 1 || a.j > 8 || a.i >= a.j)
        return input_error("invalid section " + std::to_string(a.i) + "," + std::to_string(a.j));
    RegionRequest req;
    req.t[a.i - 1] = a.ti;
    req.t[a.j - 1] = a.tj;
    req.n_samples = a.n;
    req.kind = a.kind;
    req.seed = a.seed;
    req.threads = a.threads;

    RegionResult res;
    try {
        res = sample_region(req);
    } catch (const PhysicalityError &e) {
        return input_error(e.what());
    }

    std::ofstream csv(a.csv);
    if (!csv) return input_error("cannot write " + a.csv.string());
    csv << "sample";
    for (int k = 1; k <= 8; ++k) csv << ",m" << k;
    for (int k = 1; k <= 4; ++k) csv << ",cond" << k;
    for (int k = 1; k <= 4; ++k) csv << ",margin" << k;
    csv << '\n';
    for (const auto &p : res.points) {
        csv << p.sample;
        for (double v : p.m) csv << ',' << format_double(v);
        for (int id = 1; id <= 4; ++id) {
            csv << ',';
            if (p.report[id].applicable) csv << (p.report[id].satisfied ? 1 : 0);
        }
        for (int id = 1; id <= 4; ++id) {
            csv << ',';
            if (!p.report[id].applicable) continue;
            csv << format_double(id == 2 ? p.report.cond2_residual : p.report[id].margin);
        }
        csv << '\n';
    }
    csv.close();
    if (!csv) return input_error("failed writing " + a.csv.string());

    if (a.svg) {
        try {
            write_svg(*a.svg, a, res);
        } catch (const std::exception &e) {
            return input_error(e.what());
        }
    }

    const RegionSummary &s = res.summary;
    json per_condition = json::object();
    for (int id = 1; id <= 4; ++id) {
        const bool applicable = !res.points.empty() && res.points.front().report[id].applicable;
        if (!applicable) continue;
        per_condition[std::to_string(id)] = {{"violations", s.violations[id - 1]},
                                             {"min_margin", number(s.min_margin[id - 1])},
                                             {"advisory", id == 2}};
    }
    res.points.clear();
    CommandResult out;
    out.report = {{"section", {a.i, a.j}},
                  {"t", {a.ti, a.tj}},
                  {"kind", a.kind == ChannelKind::SIO ? "sio" : "io"},
                  {"n", s.n},
                  {"seed", a.seed},
                  {"min", s.min},
                  {"max", s.max},
                  {"conditions", std::move(per_condition)},
                  {"rejected_draws", s.retries},
                  {"csv", a.csv.string()}};
    if (a.svg) out.report["svg"] = a.svg->string();
    return out;
}

CommandResult cmd_choi_rank(const std::filesystem::path &path, double tol) {
    CommandResult res;
    const auto loaded = load(path, res);
    if (!loaded) return res;
    const KrausSet &s = loaded->set;
    if (!is_channel(s)) {
        res.exit_code = kExitVerifyFailed;
        res.diagnostic = "set is not trace preserving";
        res.report = {{"input_digest", loaded->digest}, {"error", res.diagnostic}};
        return res;
    }
    std::vector<double> ev = hermitian_eigenvalues(choi(s).matrix());
    std::sort(ev.rbegin(), ev.rend());
    const double top = ev.empty() ? 0.0 : ev.front();
    json tail = json::array();
    for (double v : ev)
        if (v <= tol * top) tail.push_back(v);
    res.report = {{"input_digest", loaded->digest},
                  {"dim", s.dim()},
                  {"op_count", s.size()},
                  {"rank", choi_rank(s, tol)},
                  {"tolerance", tol},
                  {"eigenvalues", ev},
                  {"tail", std::move(tail)}};
    return res;
}

CommandResult cmd_sample(std::string_view regime_text, std::uint64_t seed, const std::filesystem::path &out) {
    const auto regime = parse_regime(regime_text);
    if (!regime) return input_error("unknown regime '" + std::string(regime_text) + "'");
    SamplerConfig cfg;
    cfg.regime = *regime;
    cfg.seed = seed;
    const KrausSet s = sample_channel(cfg);
    try {
        save_kraus_file(s, out);
    } catch (const std::exception &e) {
        return input_error(e.what());
    }
    CommandResult res;
    res.report = {{"regime", std::string(regime_name(*regime))},
                  {"seed", seed},
                  {"op_count", s.size()},
                  {"output", out.string()}};
    return res;
}

}  // namespace kf::cli
