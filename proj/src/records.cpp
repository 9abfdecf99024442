//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/records.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "carat/csv.h"
#include "carat/error.h"

namespace carat {
namespace {

using json = nlohmann::json;

ReactionRole role_field(const CsvTable &table, const CsvTable::Row &row,
                        std::size_t column) {
  const std::string &text = table.field(row, column);
  if (auto role = parse_role(text))
    return *role;
  throw DataError(fmt::format("{}:{}: bad role '{}'", table.name(), row.line,
                              text));
}

ProductionNodeId node_fields(const CsvTable &table, const CsvTable::Row &row,
                             const char *c, const char *b, const char *g) {
  ProductionNodeId id { table.field(row, table.column(c)),
                        table.field(row, table.column(b)),
                        table.field(row, table.column(g)) };
  if (id.company.empty() || id.business_process.empty() ||
      id.main_product.empty())
    throw DataError(fmt::format("{}:{}: empty node code", table.name(),
                                row.line));
  return id;
}

MixNodeId mix_fields(const CsvTable &table, const CsvTable::Row &row,
                     const char *c, const char *p) {
  MixNodeId id { table.field(row, table.column(c)),
                 table.field(row, table.column(p)) };
  if (id.company.empty() || id.product.empty())
    throw DataError(fmt::format("{}:{}: empty node code", table.name(),
                                row.line));
  return id;
}

// JSON access with the same error style as the CSV reader.
const json &member(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key))
    throw DataError(fmt::format("{}: missing field '{}'", where, key));
  return obj.at(key);
}

std::string text_member(const json &obj, const char *key,
                        const std::string &where) {
  const json &v = member(obj, key, where);
  if (!v.is_string())
    throw DataError(fmt::format("{}: field '{}' is not a string", where, key));
  return v.get<std::string>();
}

double number_member(const json &obj, const char *key,
                     const std::string &where) {
  const json &v = member(obj, key, where);
  if (!v.is_number())
    throw DataError(fmt::format("{}: bad number in field '{}'", where, key));
  return v.get<double>();
}

ReactionRole role_member(const json &obj, const std::string &where) {
  const std::string text = text_member(obj, "role", where);
  if (auto role = parse_role(text))
    return *role;
  throw DataError(fmt::format("{}: bad role '{}'", where, text));
}

const json &array_member(const json &doc, const char *key,
                         const std::string &name) {
  static const json empty = json::array();
  if (!doc.contains(key))
    return empty;
  const json &v = doc.at(key);
  if (!v.is_array())
    throw DataError(fmt::format("{}: '{}' is not an array", name, key));
  return v;
}

}  // namespace

std::vector<BomRecord> read_bom(const CsvTable &table) {
  const std::size_t role = table.column("role");
  const std::size_t material = table.column("material");
  const std::size_t ratio = table.column("ratio");
  const auto text = table.find_column("material_text");
  std::vector<BomRecord> out;
  for (const auto &row: table.rows()) {
    BomRecord r;
    r.node = node_fields(table, row, "node_c", "node_b", "node_g");
    r.role = role_field(table, row, role);
    r.material = table.field(row, material);
    r.ratio = table.number(row, ratio);
    if (text)
      r.material_text = table.field(row, *text);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<BosRecord> read_bos(const CsvTable &table) {
  const std::size_t role = table.column("role");
  const std::size_t material = table.column("material");
  const std::size_t smiles = table.column("smiles");
  const std::size_t ratio = table.column("ratio");
  std::vector<BosRecord> out;
  for (const auto &row: table.rows()) {
    BosRecord r;
    r.node = node_fields(table, row, "node_c", "node_b", "node_g");
    r.role = role_field(table, row, role);
    r.material = table.field(row, material);
    r.smiles = table.field(row, smiles);
    r.ratio = table.number(row, ratio);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MixRecord> read_mix(const CsvTable &table) {
  const std::size_t mu = table.column("mu");
  std::vector<MixRecord> out;
  for (const auto &row: table.rows()) {
    MixRecord r;
    r.mix = mix_fields(table, row, "mix_c", "mix_p");
    r.source = node_fields(table, row, "src_c", "src_b", "src_g");
    r.mu = table.number(row, mu);
    out.push_back(std::move(r));
  }
  return out;
}

InletAttributeTable read_inlets(const CsvTable &table) {
  const std::size_t smiles = table.column("smiles");
  const std::size_t element = table.column("element");
  const std::size_t attribute = table.column("attribute");
  const std::size_t share = table.column("share");
  InletAttributeTable out;
  for (const auto &row: table.rows()) {
    InletRow r;
    r.node = mix_fields(table, row, "mix_c", "mix_p");
    r.smiles = table.field(row, smiles);
    r.element = table.field(row, element);
    r.attribute = table.field(row, attribute);
    r.share = table.number(row, share);
    out.rows.push_back(std::move(r));
  }
  return out;
}

void write_bom(std::ostream &out, const std::vector<BomRecord> &rows) {
  CsvWriter w(out);
  w.row({ "node_c", "node_b", "node_g", "role", "material", "ratio",
          "material_text" });
  for (const BomRecord &r: rows)
    w.row({ r.node.company, r.node.business_process, r.node.main_product,
            std::string(to_string(r.role)), r.material, format_number(r.ratio),
            r.material_text });
}

void write_bos(std::ostream &out, const std::vector<BosRecord> &rows) {
  CsvWriter w(out);
  w.row({ "node_c", "node_b", "node_g", "role", "material", "smiles",
          "ratio" });
  for (const BosRecord &r: rows)
    w.row({ r.node.company, r.node.business_process, r.node.main_product,
            std::string(to_string(r.role)), r.material, r.smiles,
            format_number(r.ratio) });
}

void write_mix(std::ostream &out, const std::vector<MixRecord> &rows) {
  CsvWriter w(out);
  w.row({ "mix_c", "mix_p", "src_c", "src_b", "src_g", "mu" });
  for (const MixRecord &r: rows)
    w.row({ r.mix.company, r.mix.product, r.source.company,
            r.source.business_process, r.source.main_product,
            format_number(r.mu) });
}

void write_inlets(std::ostream &out, const InletAttributeTable &inlets) {
  CsvWriter w(out);
  w.row({ "mix_c", "mix_p", "smiles", "element", "attribute", "share" });
  for (const InletRow &r: inlets.rows)
    w.row({ r.node.company, r.node.product, r.smiles, r.element, r.attribute,
            format_number(r.share) });
}

GraphRecords read_bundle(std::istream &in, const std::string &name) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw DataError(fmt::format("{}: {}", name, e.what()));
  }
  if (!doc.is_object())
    throw DataError(name + ": top level is not an object");

  GraphRecords out;
  std::size_t i = 0;
  for (const json &o: array_member(doc, "bom", name)) {
    const std::string where = fmt::format("{}: bom[{}]", name, i++);
    BomRecord r;
    r.node = { text_member(o, "node_c", where), text_member(o, "node_b", where),
               text_member(o, "node_g", where) };
    r.role = role_member(o, where);
    r.material = text_member(o, "material", where);
    r.ratio = number_member(o, "ratio", where);
    if (o.contains("material_text"))
      r.material_text = text_member(o, "material_text", where);
    out.bom.push_back(std::move(r));
  }
  i = 0;
  for (const json &o: array_member(doc, "bos", name)) {
    const std::string where = fmt::format("{}: bos[{}]", name, i++);
    BosRecord r;
    r.node = { text_member(o, "node_c", where), text_member(o, "node_b", where),
               text_member(o, "node_g", where) };
    r.role = role_member(o, where);
    r.material = text_member(o, "material", where);
    r.smiles = text_member(o, "smiles", where);
    r.ratio = number_member(o, "ratio", where);
    out.bos.push_back(std::move(r));
  }
  i = 0;
  for (const json &o: array_member(doc, "mix", name)) {
    const std::string where = fmt::format("{}: mix[{}]", name, i++);
    MixRecord r;
    r.mix = { text_member(o, "mix_c", where), text_member(o, "mix_p", where) };
    r.source = { text_member(o, "src_c", where), text_member(o, "src_b", where),
                 text_member(o, "src_g", where) };
    r.mu = number_member(o, "mu", where);
    out.mix.push_back(std::move(r));
  }
  i = 0;
  for (const json &o: array_member(doc, "inlet", name)) {
    const std::string where = fmt::format("{}: inlet[{}]", name, i++);
    InletRow r;
    r.node = { text_member(o, "mix_c", where), text_member(o, "mix_p", where) };
    r.smiles = text_member(o, "smiles", where);
    r.element = text_member(o, "element", where);
    r.attribute = text_member(o, "attribute", where);
    r.share = number_member(o, "share", where);
    out.inlets.rows.push_back(std::move(r));
  }
  return out;
}

void write_bundle(std::ostream &out, const GraphRecords &records) {
  json doc = json::object();
  json &bom = doc["bom"] = json::array();
  for (const BomRecord &r: records.bom) {
    json o = { { "node_c", r.node.company },
               { "node_b", r.node.business_process },
               { "node_g", r.node.main_product },
               { "role", std::string(to_string(r.role)) },
               { "material", r.material },
               { "ratio", r.ratio } };
    if (!r.material_text.empty())
      o["material_text"] = r.material_text;
    bom.push_back(std::move(o));
  }
  json &bos = doc["bos"] = json::array();
  for (const BosRecord &r: records.bos)
    bos.push_back({ { "node_c", r.node.company },
                    { "node_b", r.node.business_process },
                    { "node_g", r.node.main_product },
                    { "role", std::string(to_string(r.role)) },
                    { "material", r.material },
                    { "smiles", r.smiles },
                    { "ratio", r.ratio } });
  json &mix = doc["mix"] = json::array();
  for (const MixRecord &r: records.mix)
    mix.push_back({ { "mix_c", r.mix.company },
                    { "mix_p", r.mix.product },
                    { "src_c", r.source.company },
                    { "src_b", r.source.business_process },
                    { "src_g", r.source.main_product },
                    { "mu", r.mu } });
  json &inlet = doc["inlet"] = json::array();
  for (const InletRow &r: records.inlets.rows)
    inlet.push_back({ { "mix_c", r.node.company },
                      { "mix_p", r.node.product },
                      { "smiles", r.smiles },
                      { "element", r.element },
                      { "attribute", r.attribute },
                      { "share", r.share } });
  out << doc.dump(2) << '\n';
}

GraphRecords read_records(const InputPaths &paths) {
  if (!paths.bundle.empty()) {
    std::ifstream in(paths.bundle);
    if (!in)
      throw std::ios_base::failure("cannot open " + paths.bundle.string());
    return read_bundle(in, paths.bundle.filename().string());
  }
  if (paths.bom.empty() || paths.bos.empty() || paths.mix.empty())
    throw std::ios_base::failure(
        "inputs need either a bundle or bom, bos and mix files");
  GraphRecords out;
  out.bom = read_bom(CsvTable::read_file(paths.bom));
  out.bos = read_bos(CsvTable::read_file(paths.bos));
  out.mix = read_mix(CsvTable::read_file(paths.mix));
  if (!paths.inlet.empty())
    out.inlets = read_inlets(CsvTable::read_file(paths.inlet));
  return out;
}

ValueChainGraph load_graph(const GraphRecords &records,
                           const LoadOptions &options,
                           std::vector<Diagnostic> *notes) {
  auto note = [&](std::string code, std::string location, std::string message,
                  std::optional<double> value = std::nullopt) {
    if (notes)
      notes->push_back({ Severity::kWarning, std::move(code),
                         std::move(location), std::move(message), value });
  };

  // Bills from the BOM, in first-appearance order per node.
  std::map<ProductionNodeId, BillOfSubstances> bills;
  std::map<std::string, std::string> texts;
  for (const BomRecord &r: records.bom) {
    BillOfSubstances &bill = bills[r.node];
    if (bill.find(r.role, r.material))
      throw DataError(fmt::format("duplicate {} material {} at {}",
                                  to_string(r.role), r.material,
                                  to_string(r.node)));
    bill.materials.push_back({ r.role, r.material, r.ratio, {} });
    if (!r.material_text.empty())
      texts[r.material] = r.material_text;
  }
  for (const BosRecord &r: records.bos) {
    auto it = bills.find(r.node);
    if (it == bills.end())
      throw DataError(fmt::format("substance row for undefined node {}",
                                  to_string(r.node)));
    MaterialLine *m = it->second.find(r.role, r.material);
    if (!m)
      throw DataError(fmt::format("substance {} names {} material {} absent "
                                  "from the bill of materials of {}",
                                  r.smiles, to_string(r.role), r.material,
                                  to_string(r.node)));
    for (const SubstanceLine &s: m->substances)
      if (s.smiles == r.smiles)
        throw DataError(fmt::format("duplicate substance {} in material {} "
                                    "at {}",
                                    r.smiles, r.material, to_string(r.node)));
    m->substances.push_back({ r.smiles, r.ratio, 0 });
  }

  ValueChainGraph graph;
  for (auto &[id, bill]: bills) {
    bill.normalize();
    graph.add_production_node(id, bill);
  }
  for (const auto &[material, text]: texts)
    graph.set_material_text(material, text);

  for (const auto &[id, bill]: bills) {
    for (const MaterialLine &m: bill.materials) {
      if (m.role != ReactionRole::kReactant)
        continue;
      MixNodeId d { id.company, m.material };
      graph.add_mix_node(d);
      graph.add_edge(d, id, m.ratio);
    }
  }

  // Mix rows, grouped per mix node to allow rescaling.
  std::map<MixNodeId, std::vector<const MixRecord *>> incoming;
  std::set<std::pair<MixNodeId, ProductionNodeId>> seen;
  for (const MixRecord &r: records.mix) {
    if (!bills.count(r.source))
      throw DataError(fmt::format("mix row for {} names undefined production "
                                  "node {}",
                                  to_string(r.mix), to_string(r.source)));
    if (!bills.at(r.source).find(ReactionRole::kProduct, r.mix.product))
      throw DataError(fmt::format("mix row for {}: {} has no product material "
                                  "{}",
                                  to_string(r.mix), to_string(r.source),
                                  r.mix.product));
    if (!seen.insert({ r.mix, r.source }).second)
      throw DataError(fmt::format("duplicate mix row {} <- {}",
                                  to_string(r.mix), to_string(r.source)));
    incoming[r.mix].push_back(&r);
  }
  for (const auto &[d, rows]: incoming) {
    graph.add_mix_node(d);
    double sum = 0;
    for (const MixRecord *r: rows)
      sum += r->mu;
    double scale = 1;
    if (options.normalize_mu && sum > 0 && std::abs(sum - 1) > 1e-12 &&
        std::abs(sum - 1) <= options.mu_tolerance) {
      scale = 1 / sum;
      note("mu-normalized", to_string(d),
           "consumption mix shares rescaled to sum to 1", sum);
    }
    for (const MixRecord *r: rows)
      graph.add_edge(r->source, d, r->mu * scale);
  }

  // Product materials nobody routes anywhere.
  if (options.synthesize_terminals) {
    const std::set<MixNodeId> existing = graph.mix_nodes();
    std::map<MixNodeId, std::vector<ProductionNodeId>> unrouted;
    for (const auto &[id, bill]: bills) {
      for (const MaterialLine &m: bill.materials) {
        if (m.role != ReactionRole::kProduct || seen.count({ { id.company,
                                                               m.material },
                                                             id }))
          continue;
        bool routed = false;
        for (const MixRecord &r: records.mix)
          if (r.source == id && r.mix.product == m.material)
            routed = true;
        if (!routed)
          unrouted[{ id.company, m.material }].push_back(id);
      }
    }
    for (const auto &[d, sources]: unrouted) {
      if (existing.count(d) || sources.size() != 1) {
        for (const ProductionNodeId &t: sources)
          note("unrouted-product", to_string(t),
               fmt::format("product material {} has no consumption mix row",
                           d.product));
        continue;
      }
      graph.add_mix_node(d);
      graph.add_edge(sources.front(), d, 1.0);
      note("terminal-synthesized", to_string(d),
           "terminal mix node added for " + to_string(sources.front()));
    }
  }

  // Canonical edge order so that equal inputs give equal graphs.
  ValueChainGraph sorted;
  for (const MixNodeId &d: graph.mix_nodes())
    sorted.add_mix_node(d);
  for (const auto &[id, bill]: graph.production_nodes())
    sorted.add_production_node(id, bill);
  for (const auto &[material, text]: graph.material_texts())
    sorted.set_material_text(material, text);
  std::vector<Edge> edges = graph.edges();
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge &a, const Edge &b) {
                     return std::tie(a.source, a.target) <
                            std::tie(b.source, b.target);
                   });
  for (const Edge &e: edges)
    sorted.add_edge(e.source, e.target, e.weight);
  return sorted;
}

GraphRecords to_records(const ValueChainGraph &graph,
                        const InletAttributeTable &inlets) {
  GraphRecords out;
  for (const auto &[id, bill]: graph.production_nodes()) {
    for (const MaterialLine &m: bill.materials) {
      auto text = graph.material_texts().find(m.material);
      out.bom.push_back({ id, m.role, m.material, m.ratio,
                          text == graph.material_texts().end() ? std::string {}
                                                               : text->second });
      for (const SubstanceLine &s: m.substances)
        out.bos.push_back({ id, m.role, m.material, s.smiles, s.ratio });
    }
  }
  for (const Edge &e: graph.edges()) {
    const auto *t = std::get_if<ProductionNodeId>(&e.source);
    const auto *d = std::get_if<MixNodeId>(&e.target);
    if (t && d)
      out.mix.push_back({ *d, *t, e.weight });
  }
  out.inlets = inlets;
  return out;
}

}  // namespace carat
