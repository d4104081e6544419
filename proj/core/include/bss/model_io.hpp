#pragma once

#include <istream>
#include <ostream>

#include "bss/forest.hpp"
#include "bss/lsboost.hpp"
#include "bss/plsr.hpp"

namespace bss {

// Self-describing text formats. Doubles are written in shortest round-trip
// form, so a model read back predicts bit-identically.

void write_model(std::ostream& out, forest_model const& m);
void write_model(std::ostream& out, boost_model const& m);
void write_model(std::ostream& out, plsr_model const& m);

forest_model read_forest(std::istream& in);
boost_model read_boost(std::istream& in);
plsr_model read_plsr(std::istream& in);

}  // namespace bss
