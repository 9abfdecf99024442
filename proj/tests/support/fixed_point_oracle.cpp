//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "support/fixed_point_oracle.h"

#include <algorithm>
#include <cmath>

namespace carat::testing {

double OracleResult::value(const SiteKey &key, std::size_t attribute) const {
  auto it = beta.find(key);
  return it == beta.end() ? 0.0 : it->second.at(attribute);
}

OracleResult fixed_point_oracle(const ValueChainGraph &graph,
                                const PsiTable &psi,
                                const InletAttributeTable &inlets,
                                const std::vector<std::string> &attributes,
                                const ElementSet &elements,
                                const OracleOptions &options) {
  const std::size_t na = attributes.size();
  struct Equation {
    SiteKey target;
    std::vector<std::pair<SiteKey, double>> terms;
  };
  std::vector<Equation> equations;
  std::map<SiteKey, std::vector<double>> fixed;

  for (const InletRow &r: inlets.rows) {
    if (!elements.count(r.element))
      continue;
    auto &v = fixed[{ r.node, r.node.product, r.smiles, r.element }];
    v.resize(na, 0.0);
    for (std::size_t a = 0; a < na; ++a)
      if (attributes[a] == r.attribute)
        v[a] += r.share;
  }

  // Production equations straight from the psi rows.
  std::map<SiteKey, std::size_t> production;
  for (const auto &[t, rows]: psi) {
    for (const PsiRow &r: rows) {
      if (!elements.count(r.element))
        continue;
      SiteKey target { t, r.product_material, r.product_smiles, r.element };
      auto [it, fresh] = production.emplace(target, equations.size());
      if (fresh)
        equations.push_back({ target, {} });
      // The supplying mix node is the company's tank of that material.
      for (const Edge &e: graph.edges()) {
        const auto *d = std::get_if<MixNodeId>(&e.source);
        if (d && e.target == NodeId(t) && d->product == r.reactant_material)
          equations[it->second].terms.push_back(
              { { *d, d->product, r.reactant_smiles, r.element }, r.share });
      }
    }
  }

  // Mix equations: every production site feeds the mix nodes its material
  // flows into.
  std::map<SiteKey, std::size_t> mix;
  for (const Edge &e: graph.edges()) {
    const auto *t = std::get_if<ProductionNodeId>(&e.source);
    const auto *d = std::get_if<MixNodeId>(&e.target);
    if (!t || !d)
      continue;
    for (const auto &[key, index]: production) {
      if (key.node != NodeId(*t) || key.material != d->product)
        continue;
      SiteKey target { *d, d->product, key.smiles, key.element };
      if (fixed.count(target))
        continue;
      auto [it, fresh] = mix.emplace(target, equations.size());
      if (fresh)
        equations.push_back({ target, {} });
      equations[it->second].terms.push_back({ key, e.weight });
    }
  }

  OracleResult out;
  out.beta = fixed;
  for (const Equation &eq: equations)
    out.beta.emplace(eq.target, std::vector<double>(na, 0.0));

  for (out.sweeps = 0; out.sweeps < options.max_sweeps;) {
    std::map<SiteKey, std::vector<double>> next = out.beta;
    double residual = 0;
    for (const Equation &eq: equations) {
      std::vector<double> sum(na, 0.0);
      for (const auto &[key, weight]: eq.terms) {
        auto it = out.beta.find(key);
        if (it == out.beta.end())
          continue;
        for (std::size_t a = 0; a < na; ++a)
          sum[a] += weight * it->second[a];
      }
      std::vector<double> &slot = next[eq.target];
      const std::vector<double> &old = out.beta.at(eq.target);
      for (std::size_t a = 0; a < na; ++a) {
        slot[a] = (1 - options.omega) * old[a] + options.omega * sum[a];
        residual = std::max(residual, std::abs(slot[a] - old[a]));
      }
    }
    out.beta = std::move(next);
    ++out.sweeps;
    out.residual = residual;
    if (residual < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace carat::testing
