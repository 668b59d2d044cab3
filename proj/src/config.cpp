#include "dopamine/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace dopamine {

namespace {

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  require(ec == std::errc() && ptr == end, "config: bad integer for key '" + key + "': " + value);
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    require(used == value.size(), "config: bad number for key '" + key + "': " + value);
    return out;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config: bad number for key '" + key + "': " + value);
  }
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct KeyEntry {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = {
      {"num_layers",
       [](RunConfig& c, const std::string& v) {
         c.arch.num_layers = static_cast<int>(parse_int("num_layers", v));
         require(c.arch.num_layers >= 1, "config: num_layers must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.arch.num_layers); }},
      {"channels",
       [](RunConfig& c, const std::string& v) {
         c.arch.channels = static_cast<int>(parse_int("channels", v));
         require(c.arch.channels >= 1, "config: channels must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.arch.channels); }},
      {"batch_size",
       [](RunConfig& c, const std::string& v) {
         c.train.batch_size = static_cast<int>(parse_int("batch_size", v));
         require(c.train.batch_size >= 1, "config: batch_size must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.train.batch_size); }},
      {"initial_lr",
       [](RunConfig& c, const std::string& v) {
         c.train.initial_lr = parse_real("initial_lr", v);
         require(c.train.initial_lr > 0, "config: initial_lr must be positive");
       },
       [](const RunConfig& c) { return format_real(c.train.initial_lr); }},
      {"lr_halving_period_epochs",
       [](RunConfig& c, const std::string& v) {
         c.train.lr_halving_period_epochs =
             static_cast<int>(parse_int("lr_halving_period_epochs", v));
         require(c.train.lr_halving_period_epochs >= 1,
                 "config: lr_halving_period_epochs must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.train.lr_halving_period_epochs); }},
      {"epochs",
       [](RunConfig& c, const std::string& v) {
         c.train.epochs = static_cast<int>(parse_int("epochs", v));
         require(c.train.epochs >= 1, "config: epochs must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.train.epochs); }},
      {"patch_size",
       [](RunConfig& c, const std::string& v) {
         c.train.patch_size = static_cast<int>(parse_int("patch_size", v));
         require(c.train.patch_size >= 3, "config: patch_size must be >= 3");
       },
       [](const RunConfig& c) { return std::to_string(c.train.patch_size); }},
      {"stride",
       [](RunConfig& c, const std::string& v) {
         c.train.stride = static_cast<int>(parse_int("stride", v));
         require(c.train.stride >= 1, "config: stride must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.train.stride); }},
      {"looks",
       [](RunConfig& c, const std::string& v) {
         c.train.looks = parse_real("looks", v);
         require(c.train.looks > 0, "config: looks must be positive");
       },
       [](const RunConfig& c) { return format_real(c.train.looks); }},
      {"blind_low",
       [](RunConfig& c, const std::string& v) {
         c.train.blind_low = parse_real("blind_low", v);
         require(c.train.blind_low > 0, "config: blind_low must be positive");
       },
       [](const RunConfig& c) { return format_real(c.train.blind_low); }},
      {"blind_high",
       [](RunConfig& c, const std::string& v) {
         c.train.blind_high = parse_real("blind_high", v);
         require(c.train.blind_high > 0, "config: blind_high must be positive");
       },
       [](const RunConfig& c) { return format_real(c.train.blind_high); }},
      {"group_size",
       [](RunConfig& c, const std::string& v) {
         c.train.group_size = static_cast<int>(parse_int("group_size", v));
         require(c.train.group_size >= 1, "config: group_size must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.train.group_size); }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.train.seed = static_cast<std::uint64_t>(parse_int("seed", v));
       },
       [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      {"adam_beta1",
       [](RunConfig& c, const std::string& v) {
         const double b = parse_real("adam_beta1", v);
         require(b >= 0 && b < 1, "config: adam_beta1 must be in [0,1)");
         c.train.adam_beta1 = b;
         c.finetune.adam_beta1 = b;
       },
       [](const RunConfig& c) { return format_real(c.train.adam_beta1); }},
      {"adam_beta2",
       [](RunConfig& c, const std::string& v) {
         const double b = parse_real("adam_beta2", v);
         require(b >= 0 && b < 1, "config: adam_beta2 must be in [0,1)");
         c.train.adam_beta2 = b;
         c.finetune.adam_beta2 = b;
       },
       [](const RunConfig& c) { return format_real(c.train.adam_beta2); }},
      {"adam_eps",
       [](RunConfig& c, const std::string& v) {
         const double e = parse_real("adam_eps", v);
         require(e > 0, "config: adam_eps must be positive");
         c.train.adam_eps = e;
         c.finetune.adam_eps = e;
       },
       [](const RunConfig& c) { return format_real(c.train.adam_eps); }},
      {"finetune_lr",
       [](RunConfig& c, const std::string& v) {
         c.finetune.lr = parse_real("finetune_lr", v);
         require(c.finetune.lr > 0, "config: finetune_lr must be positive");
       },
       [](const RunConfig& c) { return format_real(c.finetune.lr); }},
      {"finetune_epochs",
       [](RunConfig& c, const std::string& v) {
         c.finetune.epochs = static_cast<int>(parse_int("finetune_epochs", v));
         require(c.finetune.epochs >= 1, "config: finetune_epochs must be >= 1");
       },
       [](const RunConfig& c) { return std::to_string(c.finetune.epochs); }},
      {"finetune_mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "ft") {
           c.finetune.mode = FinetuneConfig::Mode::kFt;
         } else if (v == "aft") {
           c.finetune.mode = FinetuneConfig::Mode::kAft;
         } else {
           throw std::invalid_argument("config: finetune_mode must be 'ft' or 'aft'");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.finetune.mode == FinetuneConfig::Mode::kFt ? "ft" : "aft");
       }},
      {"train_dir",
       [](RunConfig& c, const std::string& v) { c.train_dir = v; },
       [](const RunConfig& c) { return c.train_dir; }},
  };
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const KeyEntry& entry : key_table()) {
    if (key == entry.name) {
      entry.set(*this, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string RunConfig::render() const {
  std::ostringstream os;
  for (const KeyEntry& entry : key_table()) {
    os << entry.name << " = " << entry.get(*this) << "\n";
  }
  return os.str();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config");
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    config.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return config;
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides) {
  for (const std::string& item : overrides) {
    const std::size_t eq = item.find('=');
    require(eq != std::string::npos, "override must look like key=value: " + item);
    config.set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

}  // namespace dopamine
