#include "pagnn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace pagnn {

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("checkpoint: truncated file");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  uint32_t n = get<uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ConfigError("checkpoint: truncated string");
  return s;
}

void put_arrays(std::ostream& out,
                const std::map<std::string, TensorData>& arrays) {
  put<uint64_t>(out, arrays.size());
  for (const auto& [name, d] : arrays) {
    put_string(out, name);
    put<uint32_t>(out, static_cast<uint32_t>(d.shape.size()));
    for (int64_t s : d.shape) put<int64_t>(out, s);
    for (const cx& e : d.v) {
      put(out, e.real());
      put(out, e.imag());
    }
  }
}

std::map<std::string, TensorData> get_arrays(std::istream& in) {
  std::map<std::string, TensorData> arrays;
  uint64_t count = get<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    std::string name = get_string(in);
    uint32_t rank = get<uint32_t>(in);
    std::vector<int64_t> shape(rank);
    for (auto& s : shape) s = get<int64_t>(in);
    TensorData d = TensorData::zeros(shape);
    for (auto& e : d.v) {
      double re = get<double>(in);
      double im = get<double>(in);
      e = cx(re, im);
    }
    arrays.emplace(std::move(name), std::move(d));
  }
  return arrays;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot write '" + path + "'");
  out.write("PGCK", 4);
  put<uint32_t>(out, 1);
  put_string(out, model.cfg.to_text());
  put_string(out, config_to_text(model.scn));
  put_arrays(out, model.params.learnable);
  put_arrays(out, model.params.buffers);
  if (!out) throw ConfigError("checkpoint: write failed for '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PGCK", 4) != 0)
    throw ConfigError("checkpoint: bad magic in '" + path + "'");
  if (get<uint32_t>(in) != 1)
    throw ConfigError("checkpoint: unsupported version");
  Model model;
  model.cfg = parse_model_config(get_string(in));
  model.scn = parse_config(get_string(in));
  model.params.learnable = get_arrays(in);
  model.params.buffers = get_arrays(in);
  return model;
}

}  // namespace pagnn
