#include "licfg/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace licfg {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::set<std::string> kSections = {"data", "train", "penalty", "nsize", "output"};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& v, const std::string& origin, int line) {
  size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(origin, line, "expected number, got '" + v + "'");
  }
  if (pos != v.size()) fail(origin, line, "expected number, got '" + v + "'");
  return out;
}

long parse_int(const std::string& v, const std::string& origin, int line) {
  const double d = parse_num(v, origin, line);
  const long l = static_cast<long>(d);
  if (static_cast<double>(l) != d) fail(origin, line, "expected integer, got '" + v + "'");
  return l;
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(origin, line, "expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, const std::string& origin, int line) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(static_cast<int>(parse_int(trim(cell), origin, line)));
  if (out.empty()) fail(origin, line, "expected comma-separated integers");
  return out;
}

std::vector<uint64_t> parse_seed_list(const std::string& v, const std::string& origin, int line) {
  std::vector<uint64_t> out;
  for (int i : parse_int_list(v, origin, line)) {
    if (i < 0) fail(origin, line, "seeds must be non-negative");
    out.push_back(static_cast<uint64_t>(i));
  }
  return out;
}

}  // namespace

ConfigFile parse_config_text(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, lineno, "unterminated section header");
      const std::string sec = trim(s.substr(1, s.size() - 2));
      if (!kSections.count(sec)) fail(origin, lineno, "unknown section '" + sec + "'");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));

    if (key == "dataset") {
      if (val != "ring" && val != "grid")
        fail(origin, lineno, "dataset must be ring or grid, got '" + val + "'");
      cfg.dataset = val;
    } else if (key == "epochs") {
      cfg.train.epochs = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "batch_size") {
      cfg.train.batch_size = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "disc_updates") {
      cfg.train.disc_updates = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "gen_examples") {
      cfg.train.gen_examples = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "gen_steps") {
      cfg.train.gen_steps = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "eta_m") {
      cfg.train.eta_m = parse_num(val, origin, lineno);
    } else if (key == "delta") {
      cfg.train.delta = parse_num(val, origin, lineno);
    } else if (key == "lr") {
      cfg.train.lr = parse_num(val, origin, lineno);
    } else if (key == "regression_steps") {
      cfg.train.regression_steps = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "snapshot_interval") {
      cfg.train.snapshot_interval = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "seed") {
      cfg.train.seed = static_cast<uint64_t>(parse_int(val, origin, lineno));
    } else if (key == "timing") {
      cfg.train.timing = parse_bool(val, origin, lineno);
    } else if (key == "g_arch") {
      cfg.train.g_arch = parse_int_list(val, origin, lineno);
    } else if (key == "d_arch") {
      cfg.train.d_arch = parse_int_list(val, origin, lineno);
    } else if (key == "penalty") {
      try {
        cfg.train.penalty.kind = penalty_by_name(val);
      } catch (const std::invalid_argument& e) {
        fail(origin, lineno, e.what());
      }
    } else if (key == "gamma") {
      cfg.train.penalty.gamma = parse_num(val, origin, lineno);
    } else if (key == "epsilon_prime") {
      cfg.train.penalty.eps_prime = parse_num(val, origin, lineno);
    } else if (key == "probes") {
      cfg.nsize.probes = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "z1_draws") {
      cfg.nsize.z1_draws = static_cast<int>(parse_int(val, origin, lineno));
    } else if (key == "epsilon_hat") {
      cfg.nsize.epsilon_hat = parse_num(val, origin, lineno);
    } else if (key == "alpha") {
      cfg.alpha = parse_num(val, origin, lineno);
    } else if (key == "seeds") {
      cfg.seeds = parse_seed_list(val, origin, lineno);
    } else if (key == "dir") {
      cfg.output_dir = val;
    } else {
      fail(origin, lineno, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

ConfigFile parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string ConfigFile::summary() const {
  std::ostringstream o;
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  o << "dataset = " << dataset << "\n"
    << "epochs = " << train.epochs << "\n"
    << "batch_size = " << train.batch_size << "\n"
    << "disc_updates = " << train.disc_updates << "\n"
    << "gen_examples = " << train.gen_examples << "\n"
    << "gen_steps = " << train.gen_steps << "\n"
    << "eta_m = " << train.eta_m << "\n"
    << "delta = " << train.delta << "\n"
    << "lr = " << train.lr << "\n"
    << "regression_steps = " << train.regression_steps << "\n"
    << "snapshot_interval = " << train.snapshot_interval << "\n"
    << "seed = " << train.seed << "\n"
    << "timing = " << (train.timing ? "true" : "false") << "\n"
    << "g_arch = " << list(train.g_arch) << "\n"
    << "d_arch = " << list(train.d_arch) << "\n"
    << "penalty = " << penalty_name(train.penalty.kind) << "\n"
    << "gamma = " << train.penalty.gamma << "\n"
    << "epsilon_prime = " << train.penalty.eps_prime << "\n"
    << "probes = " << nsize.probes << "\n"
    << "z1_draws = " << nsize.z1_draws << "\n"
    << "epsilon_hat = " << nsize.epsilon_hat << "\n"
    << "alpha = " << alpha << "\n";
  o << "seeds = ";
  for (size_t i = 0; i < seeds.size(); ++i) o << (i ? "," : "") << seeds[i];
  o << "\ndir = " << output_dir << "\n";
  return o.str();
}

}  // namespace licfg
