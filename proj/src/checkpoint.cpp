#include "saferl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "saferl/errors.hpp"

namespace saferl {

namespace {

constexpr char kMagic[8] = {'S', 'R', 'L', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw ConfigError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<CheckpointSection>& sections) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write checkpoint: " + path);
  f.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(f, 1);
  put<std::uint32_t>(f, std::uint32_t(sections.size()));
  for (const auto& s : sections) {
    put<std::uint32_t>(f, std::uint32_t(s.name.size()));
    f.write(s.name.data(), std::streamsize(s.name.size()));
    put<std::uint32_t>(f, std::uint32_t(s.dims.size()));
    for (auto d : s.dims) put<std::int64_t>(f, d);
    put<std::uint64_t>(f, std::uint64_t(s.data.size()));
    f.write(reinterpret_cast<const char*>(s.data.data()),
            std::streamsize(sizeof(double) * std::size_t(s.data.size())));
  }
  if (!f) throw ConfigError("checkpoint write failed: " + path);
}

std::vector<CheckpointSection> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("checkpoint: bad magic in " + path);
  if (get<std::uint32_t>(f) != 1) throw ConfigError("checkpoint: unsupported version");
  const auto count = get<std::uint32_t>(f);
  std::vector<CheckpointSection> out(count);
  for (auto& s : out) {
    const auto name_len = get<std::uint32_t>(f);
    s.name.resize(name_len);
    f.read(s.name.data(), name_len);
    const auto ndims = get<std::uint32_t>(f);
    s.dims.resize(ndims);
    for (auto& d : s.dims) d = get<std::int64_t>(f);
    const auto n = get<std::uint64_t>(f);
    s.data.resize(Eigen::Index(n));
    f.read(reinterpret_cast<char*>(s.data.data()),
           std::streamsize(sizeof(double) * n));
    if (!f) throw ConfigError("checkpoint: truncated section in " + path);
  }
  return out;
}

CheckpointSection mlp_section(const std::string& name, const MlpParams& params) {
  CheckpointSection s;
  s.name = name;
  for (auto w : params.arch().widths()) s.dims.push_back(std::int64_t(w));
  s.data = params.flat();
  return s;
}

MlpParams mlp_from_section(const CheckpointSection& s) {
  if (s.dims.size() < 2) throw ConfigError("checkpoint: section is not an mlp: " + s.name);
  MlpArch arch;
  arch.input = Eigen::Index(s.dims.front());
  arch.output = Eigen::Index(s.dims.back());
  for (size_t i = 1; i + 1 < s.dims.size(); ++i) arch.hidden.push_back(Eigen::Index(s.dims[i]));
  MlpParams p(arch);
  if (p.flat().size() != s.data.size())
    throw ConfigError("checkpoint: parameter count mismatch in " + s.name);
  p.flat() = s.data;
  return p;
}

CheckpointSection vector_section(const std::string& name, const Eigen::VectorXd& v) {
  CheckpointSection s;
  s.name = name;
  s.dims = {std::int64_t(v.size())};
  s.data = v;
  return s;
}

}  // namespace saferl
