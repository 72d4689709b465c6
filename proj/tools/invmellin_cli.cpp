#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "invmellin/pipeline.hpp"

using json = nlohmann::ordered_json;
using namespace invmellin;

namespace {

struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

Rat rat_from_json(const json& v) {
    if (v.is_number_integer()) return Rat(v.get<long>());
    if (v.is_string()) return parse_rat(v.get<std::string>());
    throw InputError("expected integer or \"p/q\" string, got " + v.dump());
}

Poly poly_from_json(const json& arr) {
    if (!arr.is_array() || arr.empty())
        throw InputError("polynomial must be a nonempty coefficient array");
    std::vector<Rat> c;
    for (const auto& v : arr) c.push_back(rat_from_json(v));
    return Poly(std::move(c));
}

std::vector<Poly> coeffs_from_json(const json& arr) {
    if (!arr.is_array() || arr.empty()) throw InputError("coeffs must be a nonempty array");
    std::vector<Poly> ps;
    for (const auto& a : arr) ps.push_back(poly_from_json(a));
    return ps;
}

SequenceSpec seq_from_json(const json& doc) {
    if (!doc.contains("recurrence")) throw InputError("missing \"recurrence\"");
    const json& rec = doc.at("recurrence");
    SequenceSpec seq;
    seq.rec = RecOp(coeffs_from_json(rec.at("coeffs")));
    if (rec.contains("order") && rec.at("order").get<int>() != seq.rec.order())
        throw InputError("recurrence order does not match coefficient count");
    seq.offset = doc.value("offset", 0L);
    if (!doc.contains("initial_values")) throw InputError("missing \"initial_values\"");
    for (const auto& iv : doc.at("initial_values"))
        seq.initial_values.emplace_back(iv.at("n").get<long>(), rat_from_json(iv.at("value")));
    return seq;
}

json ode_to_json(const DiffOp& L) {
    json out = json::array();
    for (int j = 0; j <= L.order(); ++j) {
        json cs = json::array();
        const Poly& p = L.coeff(j);
        for (int i = 0; i <= std::max(p.degree(), 0); ++i) cs.push_back(rat_to_string(p.coeff(i)));
        out.push_back(cs);
    }
    return out;
}

std::string real_str(const Real& v, unsigned digits) {
    return v.str(static_cast<int>(digits), std::ios_base::scientific);
}

json verification_to_json(const VerificationReport& rep, unsigned digits) {
    json out = json::array();
    for (const auto& c : rep.mellin_checks) {
        out.push_back({{"n", c.n},
                       {"lhs", real_str(c.lhs, digits)},
                       {"rhs", real_str(c.rhs, digits)},
                       {"rel_err", real_str(c.rel_err, 3)}});
    }
    return out;
}

void emit(const json& report, const std::string& json_out) {
    if (json_out.empty()) return;
    std::ofstream out(json_out);
    if (!out) throw InputError("cannot write " + json_out);
    out << report.dump(2) << "\n";
}

std::optional<std::pair<long, long>> parse_window(const std::string& w) {
    if (w.empty()) return std::nullopt;
    auto colon = w.find(':');
    if (colon == std::string::npos) throw InputError("--window expects a:b");
    return std::make_pair(std::stol(w.substr(0, colon)), std::stol(w.substr(colon + 1)));
}

int cmd_invmellin(const std::string& path, unsigned precision_flag, const std::string& window,
                  double tolerance, const std::string& json_out, const std::string& stage) {
    json doc = load_json(path);
    SequenceSpec seq = seq_from_json(doc);
    unsigned digits = precision_flag ? precision_flag : doc.value("precision", 50u);
    auto win = parse_window(window);
    if (!win && doc.contains("window"))
        win = std::make_pair(doc.at("window").at(0).get<long>(), doc.at("window").at(1).get<long>());

    json report;
    report["status"] = "Unsolved";
    report["ode"] = json::array();
    report["basis"] = json::array();
    report["constants"] = json::array();
    report["verification"] = json::array();
    report["diagnostics"] = json::array();

    if (stage == "ode" || stage == "factor") {
        DiffOp ode = recurrence_to_ode(seq.rec);
        report["ode"] = ode_to_json(ode);
        std::cout << "ODE: " << op_to_string(ode) << "\n";
        if (stage == "factor") {
            try {
                Factorization f = factor_chain(ode);
                for (const auto& [q, term] : f.right_chain) {
                    report["basis"].push_back(to_sexpr(term.expr()));
                    std::cout << "right factor: " << op_to_string(q) << "\n";
                }
                if (f.core) std::cout << "core: " << op_to_string(*f.core) << "\n";
                for (const auto& q : f.left_chain)
                    std::cout << "left factor: " << op_to_string(q) << "\n";
            } catch (const std::runtime_error& e) {
                report["diagnostics"].push_back(e.what());
                std::cout << "factorization failed: " << e.what() << "\n";
                emit(report, json_out);
                return 1;
            }
        }
        report["status"] = "Certified";
        emit(report, json_out);
        return 0;
    }

    InverseMellinResult res = inverse_mellin(seq, digits);
    if (tolerance > 0 && res.expr) {
        // re-judge against the requested tolerance
        res.report.tolerance = Real(tolerance);
        bool ok = res.fit.residual <= res.report.tolerance;
        for (const auto& c : res.report.mellin_checks) ok = ok && c.rel_err <= res.report.tolerance;
        for (const Real& r : res.report.ode_residuals) ok = ok && r <= res.report.tolerance;
        res.report.pass = ok;
        if (res.status == PipelineStatus::Certified || ok)
            res.status = ok ? PipelineStatus::Certified : PipelineStatus::Unsolved;
    }
    if (win && res.expr) {
        std::optional<double> tol;
        if (tolerance > 0) tol = tolerance;
        VerificationReport extra =
            verify_identity(seq, res.expr, win->first, win->second, digits, tol,
                            detail::interior_singularity(res.ode));
        res.report.mellin_checks = extra.mellin_checks;
        res.report.pass = res.report.pass && extra.pass;
        if (!extra.pass) res.status = PipelineStatus::Unsolved;
    }

    report["status"] = to_string(res.status);
    report["ode"] = ode_to_json(res.ode);
    for (const auto& s : res.basis.solutions) report["basis"].push_back(to_sexpr(s));
    for (std::size_t i = 0; i < res.fit.constants.size(); ++i) {
        json c = {{"numeric", real_str(res.fit.constants[i], digits)}};
        if (res.fit.exact[i]) c["exact"] = to_sexpr(res.fit.exact[i]);
        report["constants"].push_back(c);
    }
    report["verification"] = verification_to_json(res.report, digits);
    for (const auto& d : res.diagnostics) report["diagnostics"].push_back(d);

    std::cout << "status: " << to_string(res.status) << "\n";
    std::cout << "ODE: " << op_to_string(res.ode) << "\n";
    for (const auto& s : res.basis.solutions) std::cout << "basis: " << to_sexpr(s) << "\n";
    for (std::size_t i = 0; i < res.fit.constants.size(); ++i) {
        std::cout << "c" << i + 1 << " = " << real_str(res.fit.constants[i], digits);
        if (res.fit.exact[i]) std::cout << " = " << to_sexpr(res.fit.exact[i]);
        std::cout << "\n";
    }
    if (res.expr) std::cout << "f(x) = " << to_sexpr(res.expr) << "\n";
    for (const auto& c : res.report.mellin_checks)
        std::cout << "n=" << c.n << " rel_err=" << real_str(c.rel_err, 3) << "\n";
    for (const auto& d : res.diagnostics) std::cout << "diagnostic: " << d << "\n";
    emit(report, json_out);

    if (stage == "solve")
        return static_cast<int>(res.basis.solutions.size()) == res.ode.order() ? 0 : 1;
    if (stage == "fit") return res.fit.constants.empty() ? 1 : 0;
    return res.status == PipelineStatus::Certified ? 0 : 1;
}

int cmd_kovacic(const std::string& path, const std::string& json_out) {
    json doc = load_json(path);
    const json& coeffs = doc.contains("ode") ? doc.at("ode").at("coeffs") : doc.at("coeffs");
    DiffOp L(coeffs_from_json(coeffs));
    if (L.order() != 2) throw InputError("kovacic needs an order-2 operator");
    KovacicResult kr = kovacic(L);

    json report;
    report["status"] = [&] {
        switch (kr.case_tag) {
            case KovacicCase::RationalOmega: return "RationalOmega";
            case KovacicCase::QuadraticOmega: return "QuadraticOmega";
            case KovacicCase::UnsupportedCase3: return "UnsupportedCase3";
            default: return "NoLiouvillian";
        }
    }();
    report["ode"] = ode_to_json(L);
    report["basis"] = json::array();
    for (const auto& s : kr.solutions) report["basis"].push_back(to_sexpr(s));
    report["constants"] = json::array();
    report["verification"] = json::array();
    report["diagnostics"] = json::array();

    std::cout << "case: " << report["status"].get<std::string>() << "\n";
    if (kr.omega) std::cout << "omega = " << ratfun_to_string(*kr.omega) << "\n";
    if (kr.quad)
        std::cout << "omega^2 + (" << ratfun_to_string(kr.quad->first) << ") omega + ("
                  << ratfun_to_string(kr.quad->second) << ") = 0\n";
    for (const auto& s : kr.solutions) std::cout << "solution: " << to_sexpr(s) << "\n";
    if (!kr.certificate.empty()) {
        report["diagnostics"].push_back(kr.certificate);
        std::cout << "certificate: " << kr.certificate << "\n";
    }
    switch (kr.case_tag) {
        case KovacicCase::UnsupportedCase3:
            report["diagnostics"].push_back("case 3 detected but not solved: " + kr.diagnostic);
            std::cout << "case 3 detected but not solved: " << kr.diagnostic << "\n";
            break;
        case KovacicCase::NoLiouvillian:
            report["diagnostics"].push_back("no Liouvillian solutions");
            std::cout << "no Liouvillian solutions\n";
            break;
        default:
            break;
    }
    emit(report, json_out);
    return (kr.case_tag == KovacicCase::RationalOmega ||
            kr.case_tag == KovacicCase::QuadraticOmega)
               ? 0
               : 1;
}

int cmd_verify(const std::string& path, unsigned precision_flag, const std::string& window,
               double tolerance, const std::string& json_out) {
    json doc = load_json(path);
    SequenceSpec seq = seq_from_json(doc);
    if (!doc.contains("claimed")) throw InputError("missing \"claimed\"");
    ExprPtr claimed;
    try {
        claimed = parse_sexpr(doc.at("claimed").get<std::string>());
    } catch (const std::exception& e) {
        throw InputError(std::string("bad claimed expression: ") + e.what());
    }
    unsigned digits = precision_flag ? precision_flag : doc.value("precision", 50u);
    auto win = parse_window(window);
    if (!win && doc.contains("window"))
        win = std::make_pair(doc.at("window").at(0).get<long>(), doc.at("window").at(1).get<long>());
    if (!win) win = std::make_pair(1L, 5L);
    std::optional<double> tol;
    if (tolerance > 0)
        tol = tolerance;
    else if (doc.contains("tolerance"))
        tol = doc.at("tolerance").get<double>();
    std::optional<Rat> regular_at;
    if (doc.contains("regular_at")) regular_at = rat_from_json(doc.at("regular_at"));

    VerificationReport rep =
        verify_identity(seq, claimed, win->first, win->second, digits, tol, regular_at);

    json report;
    report["status"] = rep.pass ? "Certified" : "Unsolved";
    report["ode"] = json::array();
    report["basis"] = json::array({doc.at("claimed").get<std::string>()});
    report["constants"] = json::array();
    report["verification"] = verification_to_json(rep, digits);
    report["diagnostics"] = json::array();
    if (!rep.pass) report["diagnostics"].push_back("verification failed: residual above tolerance");

    std::cout << (rep.pass ? "pass" : "FAIL") << " (tolerance " << real_str(rep.tolerance, 3)
              << ")\n";
    for (const auto& c : rep.mellin_checks)
        std::cout << "n=" << c.n << " lhs=" << real_str(c.lhs, 12) << " rhs="
                  << real_str(c.rhs, 12) << " rel_err=" << real_str(c.rel_err, 3) << "\n";
    emit(report, json_out);
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integral representations of holonomic sequences"};
    app.require_subcommand(1);

    std::string path, window, json_out, stage = "all";
    unsigned precision = 0;
    double tolerance = 0;

    auto add_common = [&](CLI::App* sub, bool with_stage) {
        sub->add_option("file", path, "input JSON file")->required();
        sub->add_option("--precision", precision, "working decimal digits (default 50)");
        sub->add_option("--window", window, "verification window a:b");
        sub->add_option("--tolerance", tolerance, "relative tolerance (default 1e-(N/2))");
        sub->add_option("--json-out", json_out, "write the JSON report here");
        if (with_stage)
            sub->add_option("--stage", stage, "ode|factor|solve|fit|verify|all")
                ->check(CLI::IsMember({"ode", "factor", "solve", "fit", "verify", "all"}));
    };
    CLI::App* inv = app.add_subcommand("invmellin", "recurrence -> certified integrand");
    add_common(inv, true);
    CLI::App* kov = app.add_subcommand("kovacic", "Liouvillian solutions of an order-2 operator");
    add_common(kov, false);
    CLI::App* ver = app.add_subcommand("verify", "check a claimed integrand against a sequence");
    add_common(ver, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(inv))
            return cmd_invmellin(path, precision, window, tolerance, json_out, stage);
        if (app.got_subcommand(kov)) return cmd_kovacic(path, json_out);
        return cmd_verify(path, precision, window, tolerance, json_out);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
