//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point: validate, map, trace, scenario, report.
//

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "carat/csv.h"
#include "carat/error.h"
#include "carat/mapping.h"
#include "carat/pipeline.h"
#include "carat/records.h"
#include "carat/report.h"

namespace fs = std::filesystem;
using namespace carat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

// Bad flags, unreadable config, missing required inputs.
class ConfigError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// One logical setting, possibly registered on several subcommands. Values
// come from the command line, else CARAT_<NAME>, else the config file, else
// the built-in default.
struct Setting {
  std::string name;
  bool path = false;
  bool multi = false;
  std::vector<std::string> values;
  std::vector<CLI::Option *> options;

  bool given() const {
    for (const CLI::Option *o: options)
      if (o->count() > 0)
        return true;
    return false;
  }
};

class Settings {
public:
  Setting &declare(std::string name, bool path = false, bool multi = false) {
    auto &s = settings_[name];
    s.name = std::move(name);
    s.path = path;
    s.multi = multi;
    return s;
  }

  void attach(CLI::App &app, const std::string &name, const std::string &help) {
    Setting &s = settings_.at(name);
    CLI::Option *o = app.add_option("--" + name, s.values, help);
    if (!s.multi)
      o->expected(1);
    s.options.push_back(o);
  }

  void resolve(const std::optional<fs::path> &config_file) {
    std::map<std::string, std::vector<std::string>> from_file;
    fs::path base;
    if (config_file) {
      if (!fs::exists(*config_file))
        throw ConfigError("config file not found: " + config_file->string());
      base = config_file->parent_path();
      try {
        for (const CLI::ConfigItem &item:
             CLI::ConfigTOML().from_file(config_file->string())) {
          if (!item.parents.empty() || item.name == "++" || item.name == "--")
            continue;
          if (!settings_.count(item.name))
            throw ConfigError(fmt::format("{}: unknown setting '{}'",
                                          config_file->string(), item.name));
          from_file[item.name] = item.inputs;
        }
      } catch (const CLI::Error &e) {
        throw ConfigError(fmt::format("{}: {}", config_file->string(), e.what()));
      }
    }

    for (auto &[name, s]: settings_) {
      if (s.given())
        continue;
      std::string env_name = "CARAT_" + name;
      for (char &c: env_name)
        c = c == '-' ? '_' : static_cast<char>(std::toupper(c));
      if (const char *env = std::getenv(env_name.c_str()); env && *env) {
        s.values = s.multi ? split(env, ';') : std::vector<std::string> { env };
        continue;
      }
      auto it = from_file.find(name);
      if (it == from_file.end())
        continue;
      s.values = it->second;
      if (s.path)
        for (std::string &v: s.values)
          v = anchor(v, base);
    }
  }

  std::optional<std::string> get(const std::string &name) const {
    const Setting &s = settings_.at(name);
    if (s.values.empty())
      return std::nullopt;
    return s.values.back();
  }
  const std::vector<std::string> &all(const std::string &name) const {
    return settings_.at(name).values;
  }

  static std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t at = text.find(sep, start);
      std::string part(text.substr(start, at - start));
      const auto b = part.find_first_not_of(" \t");
      const auto e = part.find_last_not_of(" \t");
      if (b != std::string::npos)
        out.push_back(part.substr(b, e - b + 1));
      if (at == std::string_view::npos)
        break;
      start = at + 1;
    }
    return out;
  }

private:
  // Config-file paths are relative to the config file; "file:" mapper specs
  // included.
  static std::string anchor(const std::string &value, const fs::path &base) {
    if (value.rfind("file:", 0) == 0)
      return "file:" + anchor(value.substr(5), base);
    if (value.find("://") != std::string::npos || value.rfind("http:", 0) == 0)
      return value;
    const fs::path p(value);
    return p.is_absolute() || base.empty() ? value : (base / p).string();
  }

  std::map<std::string, Setting> settings_;
};

struct RunConfig {
  InputPaths inputs;
  PipelineOptions pipeline;
  std::string mapper;
  fs::path cache;
  fs::path out;
  std::vector<InletOverride> overrides;
  std::string scenario;
  fs::path export_path;
};

RunConfig make_config(const Settings &s) {
  RunConfig c;
  c.inputs.bom = s.get("bom").value_or("");
  c.inputs.bos = s.get("bos").value_or("");
  c.inputs.mix = s.get("mix").value_or("");
  c.inputs.inlet = s.get("inlet").value_or("");
  c.inputs.bundle = s.get("bundle").value_or("");
  if (c.inputs.bundle.empty() &&
      (c.inputs.bom.empty() || c.inputs.bos.empty() || c.inputs.mix.empty()))
    throw ConfigError("inputs required: --bundle, or --bom, --bos and --mix");

  if (auto e = s.get("elements")) {
    c.pipeline.elements.clear();
    for (const std::string &x: Settings::split(*e, ','))
      c.pipeline.elements.insert(x);
    if (c.pipeline.elements.empty())
      throw ConfigError("--elements is empty");
  }
  if (auto a = s.get("attributes")) {
    c.pipeline.attributes = Settings::split(*a, ',');
    if (c.pipeline.attributes.empty())
      throw ConfigError("--attributes is empty");
  }
  if (auto t = s.get("threshold")) {
    std::size_t used = 0;
    try {
      c.pipeline.threshold = std::stod(*t, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != t->size() || c.pipeline.threshold < 0 || c.pipeline.threshold >= 1)
      throw ConfigError("--threshold must be a number in [0, 1): " + *t);
  }
  c.mapper = s.get("mapper").value_or("");
  const fs::path input_dir =
      (c.inputs.bundle.empty() ? c.inputs.bom : c.inputs.bundle).parent_path();
  c.cache = s.get("cache").value_or((input_dir / "mapcache.csv").string());
  c.out = s.get("out").value_or("carat-out");
  c.scenario = s.get("name").value_or("scenario");
  c.export_path = s.get("export").value_or("");
  for (const std::string &o: s.all("override")) {
    try {
      c.overrides.push_back(parse_override(o));
    } catch (const DataError &e) {
      throw ConfigError(e.what());
    }
  }
  return c;
}

void write_file(const fs::path &path, const std::string &content) {
  if (!path.parent_path().empty())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.exceptions(std::ios::failbit | std::ios::badbit);
  out << content;
}

template <class Fn>
void write_with(const fs::path &path, Fn &&fn) {
  std::ostringstream text;
  fn(text);
  write_file(path, text.str());
}

void print_diagnostics(const std::vector<Diagnostic> &diagnostics) {
  for (const Diagnostic &d: diagnostics)
    std::cerr << format_diagnostic(d) << '\n';
}

std::string headline_name(const RunConfig &c) {
  const auto &a = c.pipeline.attributes;
  return std::find(a.begin(), a.end(), "biogenic") != a.end() ? "BCC"
                                                              : a.back();
}

void print_headlines(const RunConfig &c, const std::vector<HeadlineBcc> &lines) {
  const std::string name = headline_name(c);
  for (const HeadlineBcc &h: lines)
    std::cout << fmt::format("{}({}) = {:.1f}%\n", name, h.label, 100 * h.share);
}

std::unique_ptr<CachingMappingProvider> make_mapper(const RunConfig &c) {
  std::unique_ptr<MappingProvider> inner;
  if (!c.mapper.empty()) {
    try {
      inner = make_provider(c.mapper);
    } catch (const MappingError &) {
      throw;
    } catch (const Error &e) {
      throw ConfigError(e.what());
    }
  }
  return std::make_unique<CachingMappingProvider>(std::move(inner), c.cache);
}

void write_outputs(const fs::path &dir, const TraceResult &r) {
  write_with(dir / "beta.csv", [&](std::ostream &o) { write_beta_csv(o, r.solution); });
  write_with(dir / "slack.csv",
             [&](std::ostream &o) { write_slack_csv(o, r.solution); });
  write_with(dir / "boa.csv",
             [&](std::ostream &o) { write_boa_csv(o, r.atom_bills.bills); });
  write_file(dir / "lp.txt", r.model.dump());
  const SankeyDocument doc = emit_sankey(r.graph, r.solution);
  print_diagnostics(doc.diagnostics);
  write_file(dir / "sankey.json", sankey_json(doc));
  write_file(dir / "sankey.html", sankey_html(doc, "Carbon attribute flows"));
}

int finish_trace(const RunConfig &c, const TraceResult &r) {
  print_headlines(c, r.headlines);
  std::cout << fmt::format("total slack = {:.3g}\n", r.solution.total_slack);
  if (r.solution.total_slack >= 1e-6) {
    std::cerr << "slack above 1e-6; largest contributions:\n";
    const auto ranked = slack_report(r.solution);
    for (std::size_t i = 0; i < ranked.size() && i < 10; ++i)
      std::cerr << fmt::format("  {}  z={:.6g} q={:.6g}\n", to_string(ranked[i].key),
                               ranked[i].z, ranked[i].q);
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_validate(const RunConfig &c) {
  const GraphRecords records = read_records(c.inputs);
  std::vector<Diagnostic> found;
  const ValueChainGraph graph = load_graph(records, c.pipeline.load, &found);
  for (Diagnostic &d: validate(graph))
    found.push_back(std::move(d));
  for (Diagnostic &d: validate_inlets(graph, records.inlets))
    found.push_back(std::move(d));
  for (const Diagnostic &d: found)
    std::cout << format_diagnostic(d) << '\n';
  std::cout << fmt::format("{} mix nodes, {} production nodes, {} edges\n",
                           graph.mix_nodes().size(),
                           graph.production_nodes().size(), graph.edges().size());
  return has_errors(found) ? kExitDomain : kExitOk;
}

int cmd_map(const RunConfig &c) {
  const GraphRecords records = read_records(c.inputs);
  std::vector<Diagnostic> notes;
  ValueChainGraph graph = load_graph(records, c.pipeline.load, &notes);
  if (c.pipeline.threshold > 0)
    graph = apply_threshold(graph, c.pipeline.threshold, &notes);
  const std::vector<NodeReactions> reactions = build_reactions(graph, c.pipeline);

  if (!c.export_path.empty()) {
    write_with(c.export_path, [&](std::ostream &o) {
      CsvWriter w(o);
      w.row({ "node", "product", "reaction", "tokens" });
      for (const NodeReactions &n: reactions)
        for (const BuiltReaction &r: n.reactions)
          w.row({ to_string(n.node), r.product_smiles, r.text,
                  std::to_string(r.tokens) });
    });
    std::cout << fmt::format("exported reactions to {}\n", c.export_path.string());
    return kExitOk;
  }

  auto provider = make_mapper(c);
  std::vector<std::string> texts;
  for (const NodeReactions &n: reactions)
    for (const BuiltReaction &r: n.reactions)
      if (std::find(texts.begin(), texts.end(), r.text) == texts.end())
        texts.push_back(r.text);
  const std::size_t before = provider->size();
  provider->map(texts);
  provider->save();
  std::cout << fmt::format("{} reactions, {} newly mapped, cache {}\n",
                           texts.size(), provider->size() - before,
                           c.cache.string());
  return kExitOk;
}

TraceResult traced(const RunConfig &c, const GraphRecords &records) {
  auto provider = make_mapper(c);
  TraceResult r = run_trace(records, *provider, c.pipeline);
  provider->save();
  return r;
}

int cmd_trace(const RunConfig &c) {
  GraphRecords records = read_records(c.inputs);
  if (!c.overrides.empty()) {
    const ValueChainGraph graph = load_graph(records, c.pipeline.load);
    records.inlets = scenario_override(graph, records.inlets, c.overrides);
  }
  const TraceResult r = traced(c, records);
  print_diagnostics(r.diagnostics);
  write_outputs(c.out, r);
  return finish_trace(c, r);
}

int cmd_scenario(const RunConfig &c) {
  const GraphRecords records = read_records(c.inputs);
  const TraceResult base = traced(c, records);
  const InletAttributeTable inlets =
      scenario_override(base.graph, base.inlets, c.overrides);
  const TraceResult r = retrace(base, inlets, c.pipeline);
  print_diagnostics(r.diagnostics);
  write_outputs(c.out, base);
  const fs::path dir = c.out / c.scenario;
  write_outputs(dir, r);
  write_with(dir / "inlet.csv", [&](std::ostream &o) { write_inlets(o, inlets); });
  write_with(dir / "comparison.csv", [&](std::ostream &o) {
    write_comparison_csv(o, base.solution, r.solution);
  });
  return finish_trace(c, r);
}

int cmd_report(const RunConfig &c) {
  const GraphRecords records = read_records(c.inputs);
  std::vector<Diagnostic> notes;
  ValueChainGraph graph = load_graph(records, c.pipeline.load, &notes);
  if (c.pipeline.threshold > 0)
    graph = apply_threshold(graph, c.pipeline.threshold, &notes);
  const fs::path beta_path = c.out / "beta.csv";
  std::ifstream in(beta_path);
  if (!in)
    throw std::ios_base::failure("cannot open " + beta_path.string());
  const AttributeSolution solution = read_beta_csv(in, beta_path.string());
  const SankeyDocument doc = emit_sankey(graph, solution);
  print_diagnostics(doc.diagnostics);
  write_file(c.out / "sankey.json", sankey_json(doc));
  write_file(c.out / "sankey.html", sankey_html(doc, "Carbon attribute flows"));
  const std::string attribute =
      headline_name(c) == "BCC" ? "biogenic" : c.pipeline.attributes.back();
  const std::string element =
      c.pipeline.elements.count("C") ? "C" : *c.pipeline.elements.begin();
  print_headlines(c, headline_shares(graph, solution, attribute, element));
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "carat - carbon attribute tracing for chemical value chains" };
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  Settings settings;
  for (const char *p: { "bom", "bos", "mix", "inlet", "bundle", "out", "cache",
                        "export" })
    settings.declare(p, true);
  for (const char *p: { "elements", "attributes", "threshold", "name" })
    settings.declare(p);
  settings.declare("mapper", true);
  settings.declare("override", false, true);

  std::string config_file;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_file,
                    "TOML/INI settings file (keys are the long flag names)");
    settings.attach(*sub, "bom", "bill of materials CSV");
    settings.attach(*sub, "bos", "bill of substances CSV");
    settings.attach(*sub, "mix", "consumption mix CSV");
    settings.attach(*sub, "inlet", "inlet attribute CSV");
    settings.attach(*sub, "bundle", "single JSON document instead of the CSVs");
    settings.attach(*sub, "elements", "tracked elements, comma separated (C)");
    settings.attach(*sub, "threshold",
                    "drop substances below this mass fraction (0)");
    settings.attach(*sub, "cache", "mapping cache (mapcache.csv next to inputs)");
  };
  auto add_trace = [&](CLI::App *sub) {
    settings.attach(*sub, "attributes",
                    "attribute set, comma separated (fossil,biogenic)");
    settings.attach(*sub, "mapper", "file:<path> or http:<url>");
    settings.attach(*sub, "out", "output directory (carat-out)");
    settings.attach(*sub, "override",
                    "inlet override c,p,smiles,attribute,share (repeatable)");
  };

  CLI::App *validate_cmd = app.add_subcommand("validate", "check input data");
  add_common(validate_cmd);
  CLI::App *map_cmd = app.add_subcommand("map", "map reactions into the cache");
  add_common(map_cmd);
  settings.attach(*map_cmd, "mapper", "file:<path> or http:<url>");
  settings.attach(*map_cmd, "export",
                  "write the unmapped reactions to this CSV instead of mapping");
  CLI::App *trace_cmd = app.add_subcommand("trace", "run the full pipeline");
  add_common(trace_cmd);
  add_trace(trace_cmd);
  CLI::App *scenario_cmd =
      app.add_subcommand("scenario", "trace base and overridden inlets");
  add_common(scenario_cmd);
  add_trace(scenario_cmd);
  settings.attach(*scenario_cmd, "name", "scenario subdirectory (scenario)");
  CLI::App *report_cmd =
      app.add_subcommand("report", "rebuild the Sankey files from beta.csv");
  add_common(report_cmd);
  settings.attach(*report_cmd, "attributes", "attribute set, comma separated");
  settings.attach(*report_cmd, "out", "directory holding beta.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitIo;
  }

  try {
    std::optional<fs::path> config;
    if (!config_file.empty())
      config = config_file;
    else if (const char *env = std::getenv("CARAT_CONFIG"); env && *env)
      config = fs::path(env);
    settings.resolve(config);
    const RunConfig c = make_config(settings);

    if (validate_cmd->parsed())
      return cmd_validate(c);
    if (map_cmd->parsed())
      return cmd_map(c);
    if (trace_cmd->parsed())
      return cmd_trace(c);
    if (scenario_cmd->parsed())
      return cmd_scenario(c);
    return cmd_report(c);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure &e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError &e) {
    print_diagnostics(e.diagnostics());
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const TokenLimitError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}
