#include "svsc/mps_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "svsc/errors.hpp"

namespace svsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string pad(const std::string& s, size_t w) {
    std::string out = s;
    if (out.size() < w) out.append(w - out.size(), ' ');
    return out;
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

}  // namespace

std::string write_mps(const ProblemIR& p, const std::string& name) {
    if (!p.quadratic().empty() || !p.nonlinear().empty())
        throw ConfigError("MPS_UNSUPPORTED", "MPS cannot express quadratic or nonlinear constraints");
    p.validate();

    std::ostringstream os;
    os << "NAME          " << name << "\n";
    if (p.obj_sense == ObjSense::kMax) os << "OBJSENSE\n    MAX\n";
    os << "ROWS\n";
    os << " N  COST\n";
    for (size_t i = 0; i < p.linear().size(); ++i) {
        const auto& c = p.linear()[i];
        const char s = c.sense == Sense::kLe ? 'L' : c.sense == Sense::kGe ? 'G' : 'E';
        const std::string rn = c.name.empty() ? "R" + std::to_string(i) : c.name;
        os << " " << s << "  " << rn << "\n";
    }

    // Column-major entries: objective first, then rows in declaration order.
    std::vector<std::vector<std::pair<std::string, double>>> col_entries(
        static_cast<size_t>(p.n_vars()));
    for (const auto& t : p.objective())
        col_entries[static_cast<size_t>(t.var)].push_back({"COST", t.coef});
    for (size_t i = 0; i < p.linear().size(); ++i) {
        const auto& c = p.linear()[i];
        const std::string rn = c.name.empty() ? "R" + std::to_string(i) : c.name;
        for (const auto& t : c.terms) col_entries[static_cast<size_t>(t.var)].push_back({rn, t.coef});
    }

    os << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    for (int j = 0; j < p.n_vars(); ++j) {
        const auto& v = p.variable(j);
        const bool want_int = v.kind == VarKind::kBinary;
        if (want_int != in_int) {
            os << "    MARKER" << marker << "                 'MARKER'                 '"
               << (want_int ? "INTORG" : "INTEND") << "'\n";
            ++marker;
            in_int = want_int;
        }
        for (const auto& [row, coef] : col_entries[static_cast<size_t>(j)])
            os << "    " << pad(v.name, 10) << pad(row, 10) << num(coef) << "\n";
        if (col_entries[static_cast<size_t>(j)].empty())
            os << "    " << pad(v.name, 10) << pad("COST", 10) << "0\n";
    }
    if (in_int) os << "    MARKER" << marker << "                 'MARKER'                 'INTEND'\n";

    os << "RHS\n";
    for (size_t i = 0; i < p.linear().size(); ++i) {
        const auto& c = p.linear()[i];
        if (c.rhs == 0.0) continue;
        const std::string rn = c.name.empty() ? "R" + std::to_string(i) : c.name;
        os << "    " << pad("RHS", 10) << pad(rn, 10) << num(c.rhs) << "\n";
    }

    os << "BOUNDS\n";
    for (int j = 0; j < p.n_vars(); ++j) {
        const auto& v = p.variable(j);
        if (v.kind == VarKind::kBinary) {
            os << " BV " << pad("BND", 10) << pad(v.name, 10) << "\n";
            continue;
        }
        if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
            os << " FR " << pad("BND", 10) << pad(v.name, 10) << "\n";
            continue;
        }
        if (!std::isfinite(v.lb)) os << " MI " << pad("BND", 10) << pad(v.name, 10) << "\n";
        else if (v.lb != 0.0) os << " LO " << pad("BND", 10) << pad(v.name, 10) << num(v.lb) << "\n";
        if (std::isfinite(v.ub)) os << " UP " << pad("BND", 10) << pad(v.name, 10) << num(v.ub) << "\n";
    }
    os << "ENDATA\n";
    return os.str();
}

ProblemIR read_mps(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    enum class Section { kNone, kObjsense, kRows, kColumns, kRhs, kBounds, kDone };
    Section sec = Section::kNone;

    ProblemIR p;
    std::map<std::string, std::pair<Sense, int>> rows;  // name -> (sense, linear index)
    std::vector<LinearConstraint> linear;
    std::string obj_row;
    std::map<std::string, int> var_idx;
    struct VarDraft {
        std::string name;
        double lb = 0.0, ub = kInf;
        VarKind kind = VarKind::kContinuous;
        std::vector<std::pair<std::string, double>> entries;
        bool lb_set = false;
    };
    std::vector<VarDraft> drafts;
    bool in_int = false;

    auto draft_of = [&](const std::string& name) -> VarDraft& {
        auto it = var_idx.find(name);
        if (it == var_idx.end()) {
            var_idx[name] = static_cast<int>(drafts.size());
            drafts.push_back({name, 0.0, kInf, in_int ? VarKind::kBinary : VarKind::kContinuous, {}, false});
            return drafts.back();
        }
        return drafts[static_cast<size_t>(it->second)];
    };

    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '*') continue;
        if (line[0] != ' ') {
            const auto tk = tokens(line);
            if (tk.empty()) continue;
            if (tk[0] == "NAME") sec = Section::kNone;
            else if (tk[0] == "OBJSENSE") sec = Section::kObjsense;
            else if (tk[0] == "ROWS") sec = Section::kRows;
            else if (tk[0] == "COLUMNS") sec = Section::kColumns;
            else if (tk[0] == "RHS") sec = Section::kRhs;
            else if (tk[0] == "RANGES") throw ParseError("MPS_PARSE", "RANGES sections are not supported");
            else if (tk[0] == "BOUNDS") sec = Section::kBounds;
            else if (tk[0] == "ENDATA") sec = Section::kDone;
            else throw ParseError("MPS_PARSE", "unknown section '" + tk[0] + "'");
            continue;
        }
        const auto tk = tokens(line);
        if (tk.empty()) continue;
        switch (sec) {
            case Section::kObjsense:
                if (tk[0] == "MAX" || tk[0] == "MAXIMIZE") p.obj_sense = ObjSense::kMax;
                break;
            case Section::kRows: {
                if (tk.size() != 2) throw ParseError("MPS_PARSE", "bad ROWS line: " + line);
                if (tk[0] == "N") {
                    if (obj_row.empty()) obj_row = tk[1];
                } else {
                    Sense s = tk[0] == "L" ? Sense::kLe : tk[0] == "G" ? Sense::kGe : Sense::kEq;
                    if (tk[0] != "L" && tk[0] != "G" && tk[0] != "E")
                        throw ParseError("MPS_PARSE", "bad row sense: " + line);
                    rows[tk[1]] = {s, static_cast<int>(linear.size())};
                    LinearConstraint c;
                    c.name = tk[1];
                    c.sense = s;
                    linear.push_back(std::move(c));
                }
                break;
            }
            case Section::kColumns: {
                if (tk.size() >= 3 && tk[1] == "'MARKER'") {
                    in_int = tk[2] == "'INTORG'";
                    break;
                }
                if (tk.size() != 3 && tk.size() != 5)
                    throw ParseError("MPS_PARSE", "bad COLUMNS line: " + line);
                VarDraft& d = draft_of(tk[0]);
                for (size_t k = 1; k + 1 < tk.size(); k += 2)
                    d.entries.push_back({tk[k], std::stod(tk[k + 1])});
                break;
            }
            case Section::kRhs: {
                if (tk.size() != 3 && tk.size() != 5) throw ParseError("MPS_PARSE", "bad RHS line: " + line);
                for (size_t k = 1; k + 1 < tk.size(); k += 2) {
                    auto it = rows.find(tk[k]);
                    if (it == rows.end()) throw ParseError("MPS_PARSE", "RHS for unknown row " + tk[k]);
                    linear[static_cast<size_t>(it->second.second)].rhs = std::stod(tk[k + 1]);
                }
                break;
            }
            case Section::kBounds: {
                if (tk.size() < 3) throw ParseError("MPS_PARSE", "bad BOUNDS line: " + line);
                VarDraft& d = draft_of(tk[2]);
                const std::string& kind = tk[0];
                if (kind == "UP") d.ub = std::stod(tk.at(3));
                else if (kind == "LO") { d.lb = std::stod(tk.at(3)); d.lb_set = true; }
                else if (kind == "FX") { d.lb = d.ub = std::stod(tk.at(3)); d.lb_set = true; }
                else if (kind == "FR") { d.lb = -kInf; d.ub = kInf; d.lb_set = true; }
                else if (kind == "MI") { d.lb = -kInf; d.lb_set = true; }
                else if (kind == "BV") { d.kind = VarKind::kBinary; d.lb = 0; d.ub = 1; d.lb_set = true; }
                else throw ParseError("MPS_PARSE", "unsupported bound type " + kind);
                break;
            }
            default:
                break;
        }
    }

    for (auto& d : drafts) {
        if (d.kind == VarKind::kBinary && d.ub == kInf) d.ub = 1.0;
        p.add_variable(d.name, d.lb, d.ub, d.kind);
    }
    for (const auto& d : drafts) {
        const int j = p.var_index(d.name);
        for (const auto& [row, coef] : d.entries) {
            if (row == obj_row) {
                if (coef != 0.0) p.add_objective_term(j, coef);
            } else {
                auto it = rows.find(row);
                if (it == rows.end()) throw ParseError("MPS_PARSE", "entry for unknown row " + row);
                linear[static_cast<size_t>(it->second.second)].terms.push_back({j, coef});
            }
        }
    }
    for (auto& c : linear) p.add_linear(std::move(c));
    return p;
}

ProblemIR read_mps_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("MPS_PARSE", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_mps(buf.str());
}

std::string write_problem_text(const ProblemIR& p, const std::string& name) {
    std::ostringstream os;
    os << "problem " << name << " sense " << (p.obj_sense == ObjSense::kMin ? "min" : "max") << "\n";
    os << "variables " << p.n_vars() << "\n";
    for (int j = 0; j < p.n_vars(); ++j) {
        const auto& v = p.variable(j);
        os << "  " << v.name << " in [" << num(v.lb) << ", " << num(v.ub) << "]"
           << (v.kind == VarKind::kBinary ? " binary" : "") << "\n";
    }
    os << "objective";
    for (const auto& t : p.objective()) os << " " << num(t.coef) << "*" << p.variable(t.var).name;
    os << "\n";
    auto sense_str = [](Sense s) { return s == Sense::kLe ? "<=" : s == Sense::kGe ? ">=" : "=="; };
    os << "linear " << p.linear().size() << "\n";
    for (const auto& c : p.linear()) {
        os << "  " << (c.name.empty() ? "-" : c.name) << ":";
        for (const auto& t : c.terms) os << " " << num(t.coef) << "*" << p.variable(t.var).name;
        os << " " << sense_str(c.sense) << " " << num(c.rhs) << "\n";
    }
    os << "quadratic " << p.quadratic().size() << "\n";
    for (const auto& c : p.quadratic()) {
        os << "  " << (c.name.empty() ? "-" : c.name) << ":";
        for (const auto& q : c.quad)
            os << " " << num(q.coef) << "*" << p.variable(q.i).name << "*" << p.variable(q.j).name;
        for (const auto& t : c.lin) os << " " << num(t.coef) << "*" << p.variable(t.var).name;
        os << " " << sense_str(c.sense) << " " << num(c.rhs) << "\n";
    }
    os << "nonlinear " << p.nonlinear().size() << "\n";
    for (const auto& c : p.nonlinear()) os << "  " << (c.name.empty() ? "-" : c.name) << ": callback == 0\n";
    return os.str();
}

void export_problem(const ProblemIR& p, const std::string& path) {
    const bool mps = path.size() >= 4 && path.substr(path.size() - 4) == ".mps";
    std::ofstream out(path);
    if (!out) throw ParseError("MPS_WRITE", "cannot open '" + path + "' for writing");
    if (mps)
        out << write_mps(p);
    else
        out << write_problem_text(p);
}

}  // namespace svsc
