#include "heartval/nn/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "heartval/error.hpp"
#include "heartval/io_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "model.bin is little-endian; big-endian hosts are unsupported");

namespace heartval::nn {

namespace {

constexpr const char* kFormatName = "heartval-model";
constexpr int kFormatVersion = 1;

std::string shape_string(const std::vector<Index>& shape) {
  std::string out;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

std::string join_windows(const std::vector<int>& windows) {
  std::string out;
  for (size_t i = 0; i < windows.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(windows[i]);
  }
  return out;
}

}  // namespace

void save_model(const std::filesystem::path& dir, const ModelBundle& bundle) {
  std::filesystem::create_directories(dir);
  auto views = tensor_views(const_cast<ModelParams&>(bundle.params));

  std::ostringstream meta;
  const auto& c = bundle.config;
  meta << "format=" << kFormatName << '\n';
  meta << "version=" << kFormatVersion << '\n';
  meta << "conv_windows=" << join_windows(c.conv_windows) << '\n';
  meta << "conv_filters=" << c.conv_filters << '\n';
  meta << "conv_dropout_rate=" << fmt_double(c.conv_dropout_rate) << '\n';
  meta << "lstm_hidden_units=" << c.lstm_hidden_units << '\n';
  meta << "lstm_dropout_rate=" << fmt_double(c.lstm_dropout_rate) << '\n';
  meta << "dense_output_dim=" << c.dense_output_dim << '\n';
  meta << "epochs=" << c.epochs << '\n';
  meta << "lr_initial=" << fmt_double(c.lr_initial) << '\n';
  meta << "lr_floor=" << fmt_double(c.lr_floor) << '\n';
  meta << "lr_patience_epochs=" << c.lr_patience_epochs << '\n';
  meta << "batch_size=" << c.batch_size << '\n';
  meta << "scale_min=" << fmt_double(c.scale_min) << '\n';
  meta << "scale_max=" << fmt_double(c.scale_max) << '\n';
  meta << "input_length=" << c.input_length << '\n';
  meta << "seed=" << c.seed << '\n';
  meta << "tensor_count=" << views.size() << '\n';

  Index offset = 0;
  for (size_t i = 0; i < views.size(); ++i) {
    meta << "tensor." << i << '=' << views[i].name << ' ' << shape_string(views[i].shape)
         << ' ' << offset << '\n';
    offset += views[i].size;
  }
  write_text_file(dir / "model.meta", meta.str());

  std::ofstream bin(dir / "model.bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw Error(Errc::io_error, "cannot create " + (dir / "model.bin").string());
  for (const auto& v : views) {
    bin.write(reinterpret_cast<const char*>(v.data),
              static_cast<std::streamsize>(v.size) * static_cast<std::streamsize>(sizeof(double)));
  }
  if (!bin) throw Error(Errc::io_error, "write failed for " + (dir / "model.bin").string());
}

ModelBundle load_model(const std::filesystem::path& dir) {
  const std::string meta_text = read_text_file(dir / "model.meta");
  std::map<std::string, std::string> kv;
  std::vector<std::string> tensor_lines;
  for (auto& [key, value] : parse_key_values(meta_text)) {
    if (key.rfind("tensor.", 0) == 0) {
      tensor_lines.push_back(value);
    } else {
      kv[key] = value;
    }
  }

  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::malformed_row, std::string("missing key ") + key);
    return it->second;
  };
  if (need("format") != kFormatName)
    throw Error(Errc::malformed_row, "unrecognized format '" + need("format") + "'");
  if (parse_long(need("version")) != kFormatVersion)
    throw Error(Errc::malformed_row, "unsupported version " + need("version"));

  ModelBundle bundle;
  auto& c = bundle.config;
  c.conv_windows.clear();
  for (const auto& tok : split(need("conv_windows"), ','))
    c.conv_windows.push_back(static_cast<int>(parse_long(tok)));
  c.conv_filters = static_cast<int>(parse_long(need("conv_filters")));
  c.conv_dropout_rate = parse_double(need("conv_dropout_rate"));
  c.lstm_hidden_units = static_cast<int>(parse_long(need("lstm_hidden_units")));
  c.lstm_dropout_rate = parse_double(need("lstm_dropout_rate"));
  c.dense_output_dim = static_cast<int>(parse_long(need("dense_output_dim")));
  c.epochs = static_cast<int>(parse_long(need("epochs")));
  c.lr_initial = parse_double(need("lr_initial"));
  c.lr_floor = parse_double(need("lr_floor"));
  c.lr_patience_epochs = static_cast<int>(parse_long(need("lr_patience_epochs")));
  c.batch_size = static_cast<int>(parse_long(need("batch_size")));
  c.scale_min = parse_double(need("scale_min"));
  c.scale_max = parse_double(need("scale_max"));
  c.input_length = static_cast<Index>(parse_long(need("input_length")));
  c.seed = static_cast<uint64_t>(parse_long(need("seed")));
  validate(c, true);

  bundle.params = make_params(c);
  auto views = tensor_views(bundle.params);
  if (tensor_lines.size() != views.size() ||
      parse_long(need("tensor_count")) != static_cast<long>(views.size()))
    throw Error(Errc::malformed_row, "tensor directory does not match the config");

  Index expected_offset = 0;
  for (size_t i = 0; i < views.size(); ++i) {
    const auto fields = split(tensor_lines[i], ' ');
    if (fields.size() != 3)
      throw Error(Errc::malformed_row, "tensor entry '" + tensor_lines[i] + "'");
    if (fields[0] != views[i].name)
      throw Error(Errc::malformed_row, "tensor order mismatch at '" + fields[0] + "'");
    if (fields[1] != shape_string(views[i].shape))
      throw Error(Errc::malformed_row, "tensor shape mismatch for '" + fields[0] + "'");
    if (parse_long(fields[2]) != expected_offset)
      throw Error(Errc::malformed_row, "tensor offset mismatch for '" + fields[0] + "'");
    expected_offset += views[i].size;
  }

  std::ifstream bin(dir / "model.bin", std::ios::binary);
  if (!bin) throw Error(Errc::io_error, "cannot open " + (dir / "model.bin").string());
  bin.seekg(0, std::ios::end);
  const auto bin_size = static_cast<Index>(bin.tellg());
  bin.seekg(0, std::ios::beg);
  if (bin_size != expected_offset * static_cast<Index>(sizeof(double)))
    throw Error(Errc::io_error, "model.bin holds " + std::to_string(bin_size) +
                                    " bytes, expected " +
                                    std::to_string(expected_offset * sizeof(double)));
  for (auto& v : views) {
    bin.read(reinterpret_cast<char*>(v.data),
             static_cast<std::streamsize>(v.size) * static_cast<std::streamsize>(sizeof(double)));
  }
  if (!bin) throw Error(Errc::io_error, "read failed for " + (dir / "model.bin").string());
  return bundle;
}

}  // namespace heartval::nn
