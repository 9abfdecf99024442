//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/report.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "carat/csv.h"
#include "carat/error.h"
#include "carat/smiles.h"

namespace carat {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Rgb {
  int r, g, b;
};

Rgb parse_hex(std::string_view hex) {
  auto byte = [&](std::size_t at) {
    return std::stoi(std::string(hex.substr(at, 2)), nullptr, 16);
  };
  return { byte(1), byte(3), byte(5) };
}

}  // namespace

std::string interpolate_color(double share) {
  if (!(share > 0))
    return std::string(kFossilColor);
  if (share >= 1)
    return std::string(kBiogenicColor);
  const Rgb lo = parse_hex(kFossilColor), hi = parse_hex(kBiogenicColor);
  auto mix = [&](int a, int b) {
    return static_cast<int>(std::lround(a + (b - a) * share));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", mix(lo.r, hi.r), mix(lo.g, hi.g),
                     mix(lo.b, hi.b));
}

SankeyDocument emit_sankey(const ValueChainGraph &graph,
                           const AttributeSolution &solution,
                           const std::string &attribute,
                           const std::string &element) {
  SankeyDocument doc;
  const std::set<MixNodeId> inlets = inlet_nodes(graph);
  const std::set<MixNodeId> terminals = terminal_nodes(graph);

  for (const NodeId &id: ordered_nodes(graph)) {
    SankeyNode n;
    n.id = to_string(id);
    if (const auto *d = std::get_if<MixNodeId>(&id)) {
      n.kind = "mix";
      n.label = fmt::format("{} ({})", graph.material_label(d->product),
                            d->company);
      n.color_class = inlets.count(*d)      ? "inlet"
                      : terminals.count(*d) ? "terminal"
                                            : "intermediate";
    } else {
      const auto &t = std::get<ProductionNodeId>(id);
      n.kind = "production";
      n.label = fmt::format("{} {}", t.business_process,
                            graph.material_label(t.main_product));
      n.color_class = "process";
    }
    doc.nodes.push_back(std::move(n));
  }

  std::map<std::string, bool, std::less<>> tracked;
  auto carries = [&](const std::string &smiles) {
    auto it = tracked.find(smiles);
    if (it == tracked.end())
      it = tracked.emplace(smiles, parse_molecule(smiles).contains(element)).first;
    return it->second;
  };

  // Edges in node order so the document is stable under edge insertion order.
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < doc.nodes.size(); ++i)
    rank.emplace(doc.nodes[i].id, i);
  std::vector<Edge> edges = graph.edges();
  std::stable_sort(edges.begin(), edges.end(), [&](const Edge &a, const Edge &b) {
    return std::pair(rank.at(to_string(a.source)), rank.at(to_string(a.target))) <
           std::pair(rank.at(to_string(b.source)), rank.at(to_string(b.target)));
  });

  for (const Edge &e: edges) {
    const MaterialLine *line = nullptr;
    std::string material;
    if (const auto *t = std::get_if<ProductionNodeId>(&e.target)) {
      material = std::get<MixNodeId>(e.source).product;
      line = graph.bill(*t).find(ReactionRole::kReactant, material);
    } else if (const auto *t = std::get_if<ProductionNodeId>(&e.source)) {
      material = std::get<MixNodeId>(e.target).product;
      line = graph.bill(*t).find(ReactionRole::kProduct, material);
    }
    if (!line)
      continue;
    for (const SubstanceLine &s: line->substances) {
      SankeyLink link;
      link.source = to_string(e.source);
      link.target = to_string(e.target);
      link.smiles = s.smiles;
      link.width = e.weight * s.mass_fraction;
      if (!carries(s.smiles)) {
        link.color = std::string(kNonCarbonColor);
      } else {
        link.share = solution.find({ e.source, material, s.smiles, element },
                                   attribute);
        if (!link.share) {
          doc.diagnostics.push_back(
              { Severity::kWarning, "sankey-missing-beta", link.source,
                fmt::format("no {} share for {}; drawn as fossil", attribute,
                            s.smiles),
                std::nullopt });
        }
        link.color = interpolate_color(link.share.value_or(0.0));
      }
      doc.links.push_back(std::move(link));
    }
  }
  return doc;
}

std::string sankey_json(const SankeyDocument &doc) {
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (const SankeyNode &n: doc.nodes)
    j["nodes"].push_back({ { "id", n.id },
                           { "label", n.label },
                           { "kind", n.kind },
                           { "class", n.color_class } });
  j["links"] = ordered_json::array();
  for (const SankeyLink &l: doc.links) {
    ordered_json o { { "source", l.source },
                     { "target", l.target },
                     { "smiles", l.smiles },
                     { "value", l.width },
                     { "color", l.color } };
    o["share"] = l.share ? ordered_json(*l.share) : ordered_json(nullptr);
    j["links"].push_back(std::move(o));
  }
  return j.dump(1) + "\n";
}

namespace {

constexpr std::string_view kHtmlHead = R"(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
body {{ font-family: sans-serif; margin: 1em; }}
svg text {{ font-size: 11px; }}
.legend span {{ display: inline-block; width: 1em; height: 1em; margin: 0 .3em 0 1em; vertical-align: middle; }}
</style>
</head>
<body>
<h1>{title}</h1>
<div class="legend"><span style="background:{fossil}"></span>fossil carbon<span style="background:{bio}"></span>biogenic carbon<span style="background:{other}"></span>non-carbon</div>
<svg id="sankey" xmlns="http://www.w3.org/2000/svg"></svg>
<script type="application/json" id="sankey-data">
)";

// Columns by longest path (bounded for cycles), node heights by throughput.
constexpr std::string_view kHtmlTail = R"(</script>
<script>
(function () {
  var doc = JSON.parse(document.getElementById('sankey-data').textContent);
  var ns = 'http://www.w3.org/2000/svg', svg = document.getElementById('sankey');
  var byId = {}, col = {};
  doc.nodes.forEach(function (n, i) { byId[n.id] = n; n.order = i; col[n.id] = 0; n.inW = 0; n.outW = 0; });
  for (var pass = 0; pass < doc.nodes.length; ++pass)
    doc.links.forEach(function (l) {
      if (col[l.target] < col[l.source] + 1 && col[l.source] + 1 < doc.nodes.length)
        col[l.target] = col[l.source] + 1;
    });
  doc.links.forEach(function (l) { byId[l.source].outW += l.value; byId[l.target].inW += l.value; });
  var cols = [], scale = 60, colW = 170, gap = 24;
  doc.nodes.forEach(function (n) {
    var c = col[n.id]; (cols[c] = cols[c] || []).push(n);
    n.h = Math.max(8, scale * Math.max(n.inW, n.outW));
  });
  var height = 0;
  cols.forEach(function (list, c) {
    var y = 20;
    list.forEach(function (n) { n.x = 20 + c * colW; n.y = y; n.outY = y; n.inY = y; y += n.h + gap; });
    height = Math.max(height, y);
  });
  svg.setAttribute('width', 60 + cols.length * colW);
  svg.setAttribute('height', height + 20);
  function el(tag, attrs, parent) {
    var e = document.createElementNS(ns, tag);
    for (var k in attrs) e.setAttribute(k, attrs[k]);
    (parent || svg).appendChild(e);
    return e;
  }
  doc.links.forEach(function (l) {
    var s = byId[l.source], t = byId[l.target], w = Math.max(1, scale * l.value);
    var x0 = s.x + 12, y0 = s.outY + w / 2, x1 = t.x, y1 = t.inY + w / 2;
    s.outY += w; t.inY += w;
    var mx = (x0 + x1) / 2;
    var p = el('path', { d: 'M' + x0 + ',' + y0 + 'C' + mx + ',' + y0 + ' ' + mx + ',' + y1 + ' ' + x1 + ',' + y1,
      fill: 'none', stroke: l.color, 'stroke-width': w, 'stroke-opacity': 0.85 });
    el('title', {}, p).textContent = l.smiles + ' ' + l.value.toFixed(4) +
      (l.share === null ? '' : ' (' + (100 * l.share).toFixed(1) + '%)');
  });
  doc.nodes.forEach(function (n) {
    el('rect', { x: n.x, y: n.y, width: 12, height: n.h, fill: n.kind === 'mix' ? '#607d8b' : '#37474f' });
    el('text', { x: n.x + 15, y: n.y + 10 }).textContent = n.label;
  });
})();
</script>
</body>
</html>
)";

std::string escape_html(std::string_view text) {
  std::string out;
  for (char c: text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string sankey_html(const SankeyDocument &doc, std::string_view title) {
  std::string json = sankey_json(doc);
  // Keep the embedded document from closing its script element.
  for (std::size_t at = json.find("</"); at != std::string::npos;
       at = json.find("</", at + 3))
    json.replace(at, 2, "<\\/");
  const std::string t = escape_html(title);
  return fmt::format(fmt::runtime(kHtmlHead), fmt::arg("title", t),
                     fmt::arg("fossil", kFossilColor),
                     fmt::arg("bio", kBiogenicColor),
                     fmt::arg("other", kNonCarbonColor)) +
         json + std::string(kHtmlTail);
}

InletOverride parse_override(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    parts.emplace_back(text.substr(start, comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  if (parts.size() != 5)
    throw DataError(fmt::format("override '{}' must be "
                                "company,product,smiles,attribute,share",
                                text));
  for (const std::string &p: parts)
    if (p.empty())
      throw DataError(fmt::format("override '{}' has an empty field", text));
  InletOverride o;
  o.node = { parts[0], parts[1] };
  o.smiles = parts[2];
  o.attribute = parts[3];
  std::size_t used = 0;
  try {
    o.share = std::stod(parts[4], &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != parts[4].size())
    throw DataError(fmt::format("override '{}': share '{}' is not a number",
                                text, parts[4]));
  return o;
}

InletAttributeTable scenario_override(const ValueChainGraph &graph,
                                      const InletAttributeTable &inlets,
                                      const std::vector<InletOverride> &overrides) {
  InletAttributeTable out = inlets;
  const std::set<MixNodeId> d0 = inlet_nodes(graph);
  for (const InletOverride &o: overrides) {
    if (!graph.contains(o.node) || !d0.count(o.node))
      throw DataError(fmt::format("override targets {}, which is not an inlet "
                                  "node",
                                  to_string(o.node)));
    if (!(o.share >= 0 && o.share <= 1))
      throw DataError(fmt::format("override share {} for {} outside [0, 1]",
                                  o.share, to_string(o.node)));

    std::vector<std::string> targets;
    for (const InletRow &r: out.rows)
      if (r.node == o.node && r.element == o.element &&
          (o.smiles == "*" || r.smiles == o.smiles) &&
          std::find(targets.begin(), targets.end(), r.smiles) == targets.end())
        targets.push_back(r.smiles);
    if (targets.empty())
      throw DataError(fmt::format("inlet table has no {} shares for {} in {}",
                                  o.element, o.smiles, to_string(o.node)));

    for (const std::string &s: targets) {
      std::vector<InletRow *> others;
      InletRow *own = nullptr;
      double rest = 0;
      for (InletRow &r: out.rows) {
        if (r.node != o.node || r.smiles != s || r.element != o.element)
          continue;
        if (r.attribute == o.attribute) {
          if (own) {
            // Collapse duplicate rows of the same attribute into one.
            r.share = 0;
            continue;
          }
          own = &r;
        } else {
          others.push_back(&r);
          rest += r.share;
        }
      }
      const double remaining = 1 - o.share;
      if (remaining > 0 && others.empty())
        throw DataError(fmt::format("cannot renormalize {} {} in {}: no other "
                                    "attribute to take the remaining {}",
                                    s, o.element, to_string(o.node), remaining));
      for (InletRow *r: others)
        r->share = rest > 0 ? r->share / rest * remaining
                            : remaining / static_cast<double>(others.size());
      if (own) {
        own->share = o.share;
      } else {
        out.rows.push_back({ o.node, s, o.element, o.attribute, o.share });
      }
    }
  }
  return out;
}

namespace {

std::vector<std::string> key_fields(const SiteKey &key) {
  if (const auto *d = std::get_if<MixNodeId>(&key.node))
    return { "mix", d->company, "", "", key.material, key.smiles, key.element };
  const auto &t = std::get<ProductionNodeId>(key.node);
  return { "production", t.company, t.business_process, t.main_product,
           key.material, key.smiles, key.element };
}

const std::vector<std::string> kKeyColumns { "node_type", "c", "b", "g",
                                             "p", "smiles", "element" };

}  // namespace

void write_beta_csv(std::ostream &out, const AttributeSolution &solution) {
  CsvWriter w(out);
  std::vector<std::string> header = kKeyColumns;
  header.insert(header.end(), { "attribute", "share" });
  w.row(header);
  for (const BetaValue &b: solution.beta) {
    std::vector<std::string> row = key_fields(b.key);
    row.push_back(b.attribute);
    row.push_back(format_number(b.value));
    w.row(row);
  }
}

void write_slack_csv(std::ostream &out, const AttributeSolution &solution) {
  CsvWriter w(out);
  std::vector<std::string> header = kKeyColumns;
  header.insert(header.end(), { "z", "q" });
  w.row(header);
  for (const SlackValue &s: solution.slack) {
    std::vector<std::string> row = key_fields(s.key);
    row.push_back(format_number(s.z));
    row.push_back(format_number(s.q));
    w.row(row);
  }
}

void write_comparison_csv(std::ostream &out, const AttributeSolution &base,
                          const AttributeSolution &scenario) {
  // Base order first, then sites only the scenario has.
  std::vector<std::pair<SiteKey, std::string>> keys;
  std::set<std::pair<SiteKey, std::string>> seen;
  for (const auto *sol: { &base, &scenario })
    for (const BetaValue &b: sol->beta)
      if (seen.insert({ b.key, b.attribute }).second)
        keys.emplace_back(b.key, b.attribute);

  CsvWriter w(out);
  std::vector<std::string> header = kKeyColumns;
  header.insert(header.end(), { "attribute", "base", "scenario", "delta" });
  w.row(header);
  for (const auto &[key, attribute]: keys) {
    const double a = base.find(key, attribute).value_or(0.0);
    const double b = scenario.find(key, attribute).value_or(0.0);
    std::vector<std::string> row = key_fields(key);
    row.push_back(attribute);
    row.push_back(format_number(a));
    row.push_back(format_number(b));
    row.push_back(format_number(b - a));
    w.row(row);
  }
}

AttributeSolution read_beta_csv(std::istream &in, const std::string &name) {
  const CsvTable t = CsvTable::read(in, name);
  const std::size_t type = t.column("node_type"), c = t.column("c"),
                    b = t.column("b"), g = t.column("g"), p = t.column("p"),
                    s = t.column("smiles"), e = t.column("element"),
                    a = t.column("attribute"), v = t.column("share");
  AttributeSolution out;
  for (const CsvTable::Row &row: t.rows()) {
    SiteKey key;
    const std::string &kind = t.field(row, type);
    if (kind == "mix") {
      key.node = MixNodeId { t.field(row, c), t.field(row, p) };
    } else if (kind == "production") {
      key.node = ProductionNodeId { t.field(row, c), t.field(row, b),
                                    t.field(row, g) };
    } else {
      throw DataError(fmt::format("{}:{}: unknown node_type '{}'", name,
                                  row.line, kind));
    }
    key.material = t.field(row, p);
    key.smiles = t.field(row, s);
    key.element = t.field(row, e);
    const std::string &attribute = t.field(row, a);
    if (std::find(out.attributes.begin(), out.attributes.end(), attribute) ==
        out.attributes.end())
      out.attributes.push_back(attribute);
    out.beta.push_back({ std::move(key), attribute, t.number(row, v) });
  }
  return out;
}

}  // namespace carat
