// Command-line front end: named verification suites with JSON reports,
// and characteristic-function grid evaluation with CSV output.
//
// Exit codes: 0 all checks passed, 1 math-level failure, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "extcalc/charfn.hpp"
#include "extcalc/errors.hpp"
#include "extcalc/extenders.hpp"
#include "extcalc/suites.hpp"
#include "extcalc/symop.hpp"

namespace {

using extcalc::Complex;
using extcalc::EvGeoSeq;
using extcalc::Index;
using extcalc::Model;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t == "+") return 1.0;
  if (t == "-") return -1.0;
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw UsageError("cannot parse number: '" + text + "'");
  return v;
}

// Accepts "1+2i", "2i", "i", "-i", "0.4+1.3i", "1-0.5i", "3", "1e-3+2e-4i".
Complex parse_complex(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw UsageError("empty complex literal");
  if (s.back() != 'i') return Complex(parse_real(s), 0.0);
  s.pop_back();
  // split at the last +/- that is neither leading nor an exponent sign
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      return Complex(parse_real(s.substr(0, k)), parse_real(s.substr(k)));
    }
  }
  return Complex(0.0, parse_real(s));
}

// Sum of unit-vector terms: "e4", "e2+e6", "e-3+e0".
EvGeoSeq parse_unit_sum(const std::string& text) {
  EvGeoSeq out = EvGeoSeq::zero();
  std::size_t pos = 0;
  const std::string s = trim(text);
  while (pos < s.size()) {
    if (s[pos] != 'e')
      throw UsageError("expected unit term 'eK' in '" + text + "'");
    std::size_t end = pos + 1;
    if (end < s.size() && (s[end] == '-' || s[end] == '+')) ++end;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end])))
      ++end;
    if (end == pos + 1)
      throw UsageError("expected index after 'e' in '" + text + "'");
    out += EvGeoSeq::unit(std::stoll(s.substr(pos + 1, end - pos - 1)));
    if (end < s.size()) {
      if (s[end] != '+')
        throw UsageError("expected '+' between unit terms in '" + text + "'");
      ++end;
    }
    pos = end;
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

// shift(M) | restricted(M,u1,u2,...) with uk a sum of unit terms |
// exit(M,M1)
Model parse_model(const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw UsageError("model spec must look like name(args): '" + text + "'");
  const std::string name = trim(s.substr(0, open));
  const std::vector<std::string> args =
      split(s.substr(open + 1, s.size() - open - 2), ',');
  try {
    if (name == "shift") {
      if (args.size() != 1) throw UsageError("shift takes one argument");
      return Model(extcalc::ShiftModel(std::stoll(trim(args[0]))));
    }
    if (name == "restricted") {
      if (args.size() < 2)
        throw UsageError("restricted takes a stride and at least one vector");
      std::vector<EvGeoSeq> u;
      for (std::size_t k = 1; k < args.size(); ++k)
        u.push_back(parse_unit_sum(args[k]));
      return Model(extcalc::RestrictedModel(
          extcalc::ShiftModel(std::stoll(trim(args[0]))), std::move(u)));
    }
    if (name == "exit") {
      if (args.size() != 2) throw UsageError("exit takes two arguments");
      return Model(extcalc::ExitModel(
          extcalc::ShiftModel(std::stoll(trim(args[0]))),
          std::stoll(trim(args[1]))));
    }
  } catch (const extcalc::Error& ex) {
    throw UsageError(std::string("invalid model: ") + ex.what());
  } catch (const std::invalid_argument&) {
    throw UsageError("invalid integer in model spec: '" + text + "'");
  }
  throw UsageError("unknown model kind: '" + name + "'");
}

// "default" | "" (empty grid) | "re,im;re,im;..."
std::vector<Complex> parse_grid(const std::string& text) {
  const std::string s = trim(text);
  if (s == "default") return extcalc::default_grid();
  std::vector<Complex> zs;
  if (s.empty()) return zs;
  for (const std::string& point : split(s, ';')) {
    const std::vector<std::string> parts = split(point, ',');
    if (parts.size() != 2)
      throw UsageError("grid points must be 're,im' pairs: '" + point + "'");
    zs.emplace_back(parse_real(parts[0]), parse_real(parts[1]));
  }
  return zs;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string entries_field(const extcalc::Matrix& m) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (r + c > 0) os << ' ';
      const Complex v = m(r, c);
      os << num(v.real()) << (v.imag() < 0 ? "" : "+") << num(v.imag()) << 'i';
    }
  return os.str();
}

void write_grid_row(std::ostream& out, Complex z, const char* route,
                    const extcalc::CharFnSample* sample,
                    const std::string& error) {
  out << num(z.real()) << ',' << num(z.imag()) << ',' << route << ',';
  if (sample) {
    out << '"' << entries_field(sample->matrix) << "\","
        << num(sample->bound_slack) << ','
        << (sample->flagged ? "illconditioned" : "ok");
  } else {
    out << "\"\",," << error;
  }
  out << '\n';
}

int run_grid_mode(const std::string& model_spec, const std::string& lambda_str,
                  const std::string& grid_spec, std::ostream& out,
                  const extcalc::TolerancePolicy& tol) {
  const Model model = parse_model(model_spec);
  const Complex lambda = parse_complex(lambda_str);
  const std::vector<Complex> zs = parse_grid(grid_spec);

  out << "re_z,im_z,route,entries,bound_slack,flag\n";
  for (const Complex z : zs) {
    try {
      const extcalc::CharFnSample s =
          extcalc::charfn_via_Nz(model, lambda, z, tol);
      write_grid_row(out, z, "via_Nz", &s, "");
    } catch (const extcalc::Error& ex) {
      write_grid_row(out, z, "via_Nz", nullptr,
                     std::string("error: ") + ex.what());
    }
    try {
      const extcalc::CharFnSample s =
          extcalc::charfn_via_cayley(model, lambda, z, tol);
      write_grid_row(out, z, "via_cayley", &s, "");
    } catch (const extcalc::Error& ex) {
      write_grid_row(out, z, "via_cayley", nullptr,
                     std::string("error: ") + ex.what());
    }
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Verification suites and characteristic-function grids for the "
      "extension/compression calculus of symmetric operators"};

  std::string suite;
  std::string model_spec;
  std::string lambda_str = "i";
  std::string grid_spec = "default";
  std::string out_path;
  std::uint64_t seed = 0;
  int trials = 10;
  extcalc::TolerancePolicy tol;

  app.add_option("--suite", suite,
                 "named verification suite (see --list-suites)");
  app.add_flag_callback(
      "--list-suites",
      [] {
        for (const std::string& n : extcalc::suite_names())
          std::cout << n << "\n";
        std::exit(0);
      },
      "print the registered suite names and exit");
  app.add_option("--seed", seed, "RNG seed for the randomized instances")
      ->envname("EXTCALC_SEED");
  app.add_option("--trials", trials, "number of randomized trials per case");
  app.add_option("--tol-rank", tol.rank_tol, "relative rank threshold");
  app.add_option("--tol-eq", tol.eq_tol, "absolute identity threshold");
  app.add_option("--out", out_path, "write the report here (default stdout)");
  app.add_option("--model", model_spec,
                 "grid mode: shift(M) | restricted(M,u1,...) | exit(M,M1)");
  app.add_option("--lambda", lambda_str,
                 "grid mode: base point in the upper half-plane, e.g. 1+2i");
  app.add_option("--grid", grid_spec,
                 "grid mode: 'default', '' (empty), or 're,im;re,im;...'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  if (suite.empty() == model_spec.empty()) {
    std::cerr << "error: pass exactly one of --suite or --model\n";
    return 2;
  }

  try {
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) {
        std::cerr << "error: cannot open '" << out_path << "' for writing\n";
        return 2;
      }
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    if (!model_spec.empty())
      return run_grid_mode(model_spec, lambda_str, grid_spec, out, tol);

    extcalc::SuiteConfig cfg;
    cfg.suite_name = suite;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.tol = tol;
    const extcalc::RunReport rep = extcalc::run_suite(cfg);
    out << extcalc::report_to_json(rep);

    int passed = 0;
    for (const extcalc::CaseResult& c : rep.cases) passed += c.pass ? 1 : 0;
    std::cerr << "suite " << rep.suite_name << ": " << passed << "/"
              << rep.cases.size() << " cases passed (" << rep.wall_seconds
              << " s)\n";
    return rep.all_pass ? 0 : 1;
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const extcalc::UnknownSuite& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const extcalc::PreconditionViolated& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
