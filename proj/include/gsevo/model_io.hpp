#pragma once

#include <filesystem>
#include <iosfwd>

#include "gsevo/data.hpp"
#include "gsevo/model.hpp"

namespace gsevo {

/// A trained model together with the input transform its training data went through.
struct ModelBundle {
  DnnModel<double> model;
  ColumnScaler input;
};

/// Text container, version 1:
///
///   gsevo-model 1
///   activation rectifier
///   widths 20 64 3
///   input_transform minmax
///   offset <n_f reals>
///   scale <n_f reals>
///   parameters <count>
///   <one real per line, canonical flattening order>
///
/// The offset/scale lines are present only when input_transform is not "none". Reals use the
/// shortest representation that round-trips exactly.
void write_model(std::ostream& out, const ModelBundle& bundle);
ModelBundle read_model(std::istream& in, const std::string& source_name = "<model>");

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace gsevo
