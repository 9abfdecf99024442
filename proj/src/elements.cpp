//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#include "carat/elements.h"

#include <algorithm>
#include <array>
#include <string>

#include "carat/error.h"

namespace carat {
namespace {

constexpr std::optional<double> kNoWeight = std::nullopt;

// IUPAC standard atomic weights (abridged), five significant figures.
constexpr std::array<ElementInfo, 118> kElements { {
  { "H", 1, 1.0080 },    { "He", 2, 4.0026 },   { "Li", 3, 6.9400 },
  { "Be", 4, 9.0122 },   { "B", 5, 10.810 },    { "C", 6, 12.011 },
  { "N", 7, 14.007 },    { "O", 8, 15.999 },    { "F", 9, 18.998 },
  { "Ne", 10, 20.180 },  { "Na", 11, 22.990 },  { "Mg", 12, 24.305 },
  { "Al", 13, 26.982 },  { "Si", 14, 28.085 },  { "P", 15, 30.974 },
  { "S", 16, 32.060 },   { "Cl", 17, 35.450 },  { "Ar", 18, 39.950 },
  { "K", 19, 39.098 },   { "Ca", 20, 40.078 },  { "Sc", 21, 44.956 },
  { "Ti", 22, 47.867 },  { "V", 23, 50.942 },   { "Cr", 24, 51.996 },
  { "Mn", 25, 54.938 },  { "Fe", 26, 55.845 },  { "Co", 27, 58.933 },
  { "Ni", 28, 58.693 },  { "Cu", 29, 63.546 },  { "Zn", 30, 65.380 },
  { "Ga", 31, 69.723 },  { "Ge", 32, 72.630 },  { "As", 33, 74.922 },
  { "Se", 34, 78.971 },  { "Br", 35, 79.904 },  { "Kr", 36, 83.798 },
  { "Rb", 37, 85.468 },  { "Sr", 38, 87.620 },  { "Y", 39, 88.906 },
  { "Zr", 40, 91.224 },  { "Nb", 41, 92.906 },  { "Mo", 42, 95.950 },
  { "Tc", 43, kNoWeight }, { "Ru", 44, 101.07 }, { "Rh", 45, 102.91 },
  { "Pd", 46, 106.42 },  { "Ag", 47, 107.87 },  { "Cd", 48, 112.41 },
  { "In", 49, 114.82 },  { "Sn", 50, 118.71 },  { "Sb", 51, 121.76 },
  { "Te", 52, 127.60 },  { "I", 53, 126.90 },   { "Xe", 54, 131.29 },
  { "Cs", 55, 132.91 },  { "Ba", 56, 137.33 },  { "La", 57, 138.91 },
  { "Ce", 58, 140.12 },  { "Pr", 59, 140.91 },  { "Nd", 60, 144.24 },
  { "Pm", 61, kNoWeight }, { "Sm", 62, 150.36 }, { "Eu", 63, 151.96 },
  { "Gd", 64, 157.25 },  { "Tb", 65, 158.93 },  { "Dy", 66, 162.50 },
  { "Ho", 67, 164.93 },  { "Er", 68, 167.26 },  { "Tm", 69, 168.93 },
  { "Yb", 70, 173.05 },  { "Lu", 71, 174.97 },  { "Hf", 72, 178.49 },
  { "Ta", 73, 180.95 },  { "W", 74, 183.84 },   { "Re", 75, 186.21 },
  { "Os", 76, 190.23 },  { "Ir", 77, 192.22 },  { "Pt", 78, 195.08 },
  { "Au", 79, 196.97 },  { "Hg", 80, 200.59 },  { "Tl", 81, 204.38 },
  { "Pb", 82, 207.20 },  { "Bi", 83, 208.98 },  { "Po", 84, kNoWeight },
  { "At", 85, kNoWeight }, { "Rn", 86, kNoWeight }, { "Fr", 87, kNoWeight },
  { "Ra", 88, kNoWeight }, { "Ac", 89, kNoWeight }, { "Th", 90, 232.04 },
  { "Pa", 91, 231.04 },  { "U", 92, 238.03 },   { "Np", 93, kNoWeight },
  { "Pu", 94, kNoWeight }, { "Am", 95, kNoWeight }, { "Cm", 96, kNoWeight },
  { "Bk", 97, kNoWeight }, { "Cf", 98, kNoWeight }, { "Es", 99, kNoWeight },
  { "Fm", 100, kNoWeight }, { "Md", 101, kNoWeight }, { "No", 102, kNoWeight },
  { "Lr", 103, kNoWeight }, { "Rf", 104, kNoWeight }, { "Db", 105, kNoWeight },
  { "Sg", 106, kNoWeight }, { "Bh", 107, kNoWeight }, { "Hs", 108, kNoWeight },
  { "Mt", 109, kNoWeight }, { "Ds", 110, kNoWeight }, { "Rg", 111, kNoWeight },
  { "Cn", 112, kNoWeight }, { "Nh", 113, kNoWeight }, { "Fl", 114, kNoWeight },
  { "Mc", 115, kNoWeight }, { "Lv", 116, kNoWeight }, { "Ts", 117, kNoWeight },
  { "Og", 118, kNoWeight },
} };

}  // namespace

const ElementInfo *find_element(std::string_view symbol) {
  auto it = std::find_if(kElements.begin(), kElements.end(),
                         [&](const ElementInfo &e) { return e.symbol == symbol; });
  return it == kElements.end() ? nullptr : &*it;
}

double atomic_weight(std::string_view symbol) {
  const ElementInfo *info = find_element(symbol);
  if (info == nullptr)
    throw Error("unknown element: " + std::string(symbol));
  if (!info->atomic_weight)
    throw Error("no standard atomic weight for element: " + std::string(symbol));
  return *info->atomic_weight;
}

}  // namespace carat
