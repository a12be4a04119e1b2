#include "savar/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "savar/error.hpp"

namespace savar::io {

namespace {

using Eigen::Index;
using json = nlohmann::json;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_validation("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_validation("cannot write " + path.string());
    return out;
}

std::size_t parse_size(std::string_view text, const std::string& what) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) fail_validation(what + ": '" + std::string(text) + "' is not a count");
    return v;
}

std::string dot_id(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(std::string_view text, const std::string& what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (text.empty() || r.ec != std::errc() || r.ptr != end)
        fail_validation(what + ": '" + std::string(text) + "' is not a number");
    return v;
}

TimeSeriesPanel read_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) fail_validation("empty CSV input");
    for (auto f : split(line, ',')) {
        if (f.empty()) fail_validation("line " + std::to_string(lineno) + ": empty column label");
        labels.emplace_back(f);
    }
    const std::size_t p = labels.size();
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != p)
            fail_validation("line " + std::to_string(lineno) + ": " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(p));
        for (std::size_t c = 0; c < p; ++c)
            values.push_back(parse_double(
                fields[c], "line " + std::to_string(lineno) + ", column " + std::to_string(c + 1)));
        ++rows;
    }
    TimeSeriesPanel panel;
    panel.labels = std::move(labels);
    panel.data.resize(idx(rows), idx(p));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < p; ++c) panel.data(idx(r), idx(c)) = values[r * p + c];
    panel.validate();
    return panel;
}

TimeSeriesPanel read_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_csv(in);
}

void write_csv(std::ostream& out, const TimeSeriesPanel& panel) {
    const auto names = panel.column_names();
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
    for (Index r = 0; r < panel.data.rows(); ++r) {
        for (Index c = 0; c < panel.data.cols(); ++c) out << (c ? "," : "") << format_double(panel.data(r, c));
        out << '\n';
    }
    if (!out) fail_validation("write failed");
}

void write_csv(const std::filesystem::path& path, const TimeSeriesPanel& panel) {
    auto out = open_out(path);
    write_csv(out, panel);
}

AdditiveVarSpec read_spec(std::istream& in) {
    std::optional<std::size_t> p;
    NoiseModel noise;
    std::uint64_t seed = 0;
    struct Pending {
        std::size_t j, k, line;
        ComponentFunction fn;
    };
    std::vector<Pending> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        const std::string where = "spec line " + std::to_string(lineno);
        if (eq == std::string_view::npos) fail_validation(where + ": expected key = value");
        const std::string key(trim(s.substr(0, eq)));
        const std::string_view value = trim(s.substr(eq + 1));
        if (key == "p") {
            p = parse_size(value, where);
        } else if (key == "noise") {
            noise.kind = NoiseModel::parse_kind(std::string(value));
        } else if (key == "noise_scale") {
            noise.scale = parse_double(value, where);
        } else if (key == "noise_df") {
            noise.df = parse_double(value, where);
        } else if (key == "seed") {
            seed = parse_size(value, where);
        } else if (key == "entry") {
            std::vector<std::string_view> parts;
            for (auto f : split(value, ' '))
                if (!f.empty()) parts.push_back(f);
            if (parts.size() != 3) fail_validation(where + ": entry needs <j> <k> <component>");
            entries.push_back({parse_size(parts[0], where), parse_size(parts[1], where), lineno,
                               ComponentFunction::parse(std::string(parts[2]))});
        } else {
            fail_validation(where + ": unknown key '" + key + "'");
        }
    }
    if (!p) fail_validation("spec is missing p");
    AdditiveVarSpec spec(*p, noise, seed);
    for (const auto& e : entries) {
        if (e.j >= *p || e.k >= *p)
            fail_validation("spec line " + std::to_string(e.line) + ": index out of range");
        spec.set(e.j, e.k, e.fn);
    }
    spec.validate();
    return spec;
}

AdditiveVarSpec read_spec(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_spec(in);
}

void write_spec(std::ostream& out, const AdditiveVarSpec& spec) {
    out << "p = " << spec.dim() << '\n'
        << "noise = " << spec.noise().name() << '\n'
        << "noise_scale = " << format_double(spec.noise().scale) << '\n'
        << "noise_df = " << format_double(spec.noise().df) << '\n'
        << "seed = " << spec.seed() << '\n';
    for (const auto& [key, fn] : spec.entries()) {
        if (!fn.serializable()) fail_validation("component '" + fn.token() + "' cannot be written");
        out << "entry = " << key.first << ' ' << key.second << ' ' << fn.token() << '\n';
    }
}

void write_fit_json(std::ostream& out, const FitResult& fit) {
    const std::size_t p = fit.dim(), L = fit.coefficients.basis_size();
    json j;
    j["format"] = "savar-fit";
    j["version"] = 1;
    j["p"] = p;
    j["L"] = L;
    j["lambda"] = fit.lambda;
    j["converged"] = fit.converged;
    j["sweeps_used"] = fit.sweeps_used;
    j["kkt_residual"] = fit.kkt_residual;
    j["objective_trace"] = fit.objective_trace;
    j["labels"] = fit.labels;
    j["basis"] = {{"kind", fit.basis.kind == BasisKind::fourier ? "fourier" : "identity"},
                  {"size", fit.basis.size},
                  {"c0", fit.basis.c0},
                  {"include_constant", fit.basis.include_constant}};
    j["shift"] = std::vector<double>(fit.shift.data(), fit.shift.data() + fit.shift.size());
    j["intercept"] = std::vector<double>(fit.intercept.data(), fit.intercept.data() + fit.intercept.size());
    json coef = json::array();
    for (std::size_t r = 0; r < p; ++r) {
        json row = json::array();
        for (std::size_t k = 0; k < p; ++k) {
            const auto b = fit.coefficients.block(r, k);
            row.push_back(std::vector<double>(b.begin(), b.end()));
        }
        coef.push_back(std::move(row));
    }
    j["coefficients"] = std::move(coef);
    json support = json::array();
    for (const auto& [a, b] : fit.support) support.push_back({a, b});
    j["support"] = std::move(support);
    json norms = json::array();
    for (Index r = 0; r < fit.group_norms.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(fit.group_norms.cols()));
        for (Index c = 0; c < fit.group_norms.cols(); ++c) row[static_cast<std::size_t>(c)] = fit.group_norms(r, c);
        norms.push_back(row);
    }
    j["group_norms"] = std::move(norms);
    j["degenerate_grams"] = fit.degenerate_grams;
    out << j.dump(2) << '\n';
    if (!out) fail_validation("write failed");
}

void write_fit_json(const std::filesystem::path& path, const FitResult& fit) {
    auto out = open_out(path);
    write_fit_json(out, fit);
}

FitResult read_fit_json(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail_validation(std::string("malformed fit JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "savar-fit") fail_validation("not a savar fit file");
        const auto p = j.at("p").get<std::size_t>();
        const auto L = j.at("L").get<std::size_t>();
        FitResult r;
        r.lambda = j.at("lambda").get<double>();
        r.converged = j.value("converged", false);
        r.sweeps_used = j.value("sweeps_used", 0);
        r.kkt_residual = j.value("kkt_residual", 0.0);
        r.objective_trace = j.value("objective_trace", std::vector<double>{});
        r.labels = j.value("labels", std::vector<std::string>{});
        const auto& b = j.at("basis");
        const auto kind = b.at("kind").get<std::string>();
        if (kind == "fourier") r.basis.kind = BasisKind::fourier;
        else if (kind == "identity") r.basis.kind = BasisKind::identity;
        else fail_validation("unknown basis kind '" + kind + "'");
        r.basis.size = b.at("size").get<std::size_t>();
        r.basis.c0 = b.at("c0").get<double>();
        r.basis.include_constant = b.at("include_constant").get<bool>();
        r.basis.validate();
        if (r.basis.size != L) fail_validation("basis size does not match L");
        const auto shift = j.at("shift").get<std::vector<double>>();
        const auto icpt = j.at("intercept").get<std::vector<double>>();
        if (shift.size() != p || icpt.size() != p) fail_validation("shift/intercept length must equal p");
        r.shift = Eigen::Map<const Eigen::VectorXd>(shift.data(), idx(p));
        r.intercept = Eigen::Map<const Eigen::VectorXd>(icpt.data(), idx(p));
        r.coefficients = CoefficientTensor(p, L);
        const auto& coef = j.at("coefficients");
        if (coef.size() != p) fail_validation("coefficient rows must equal p");
        r.adjacency = Eigen::MatrixXi::Zero(idx(p), idx(p));
        r.group_norms = Eigen::MatrixXd::Zero(idx(p), idx(p));
        for (std::size_t a = 0; a < p; ++a) {
            if (coef[a].size() != p) fail_validation("coefficient columns must equal p");
            for (std::size_t k = 0; k < p; ++k) {
                const auto v = coef[a][k].get<std::vector<double>>();
                if (v.size() != L) fail_validation("coefficient block length must equal L");
                std::copy(v.begin(), v.end(), r.coefficients.block(a, k).begin());
            }
        }
        for (const auto& e : j.at("support")) {
            const auto a = e.at(0).get<std::size_t>(), k = e.at(1).get<std::size_t>();
            if (a >= p || k >= p) fail_validation("support index out of range");
            r.support.emplace_back(a, k);
            r.adjacency(idx(a), idx(k)) = 1;
        }
        if (j.contains("group_norms")) {
            const auto& g = j["group_norms"];
            for (std::size_t a = 0; a < p && a < g.size(); ++a)
                for (std::size_t k = 0; k < p && k < g[a].size(); ++k)
                    r.group_norms(idx(a), idx(k)) = g[a][k].get<double>();
        }
        r.degenerate_grams = j.value("degenerate_grams", std::vector<std::size_t>{});
        return r;
    } catch (const json::exception& e) {
        fail_validation(std::string("malformed fit JSON: ") + e.what());
    }
}

FitResult read_fit_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_fit_json(in);
}

void write_dot(std::ostream& out, const FitResult& fit) {
    const std::size_t p = fit.dim();
    std::vector<std::string> names = fit.labels;
    if (names.size() != p) {
        names.clear();
        for (std::size_t i = 0; i < p; ++i) names.push_back("x" + std::to_string(i + 1));
    }
    out << "digraph network {\n";
    for (const auto& n : names) out << "  " << dot_id(n) << ";\n";
    for (const auto& [j, k] : fit.support) {
        const double w = fit.group_norms.size() ? fit.group_norms(idx(j), idx(k)) : 0.0;
        out << "  " << dot_id(names[k]) << " -> " << dot_id(names[j]) << " [label=\"" << format_double(w)
            << "\"];\n";
    }
    out << "}\n";
    if (!out) fail_validation("write failed");
}

void write_dot(const std::filesystem::path& path, const FitResult& fit) {
    auto out = open_out(path);
    write_dot(out, fit);
}

}  // namespace savar::io
