#include "mlkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace mlkit {

namespace {

constexpr std::size_t kMagicLength = sizeof(kCheckpointMagic) - 1;
constexpr std::uint64_t kMaxDim = 1u << 24;

template <typename U>
void put(std::vector<unsigned char>& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <typename U>
  U get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(U)) {
      throw CorruptCheckpoint(std::string("checkpoint truncated while reading ") + what);
    }
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      v |= static_cast<U>(bytes_[pos_ + b]) << (8 * b);
    }
    pos_ += sizeof(U);
    return v;
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void checkpoint_save(const EmbedderModel& model, const std::filesystem::path& path) {
  std::vector<unsigned char> out(kCheckpointMagic, kCheckpointMagic + kMagicLength);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, model.architecture() == Architecture::Linear ? 0u : 1u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.dims().size()));
  for (std::size_t d : model.dims()) put<std::uint64_t>(out, d);
  for (const Matrix& p : model.parameters()) {
    for (double v : p.data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoFailure("failed writing " + path.string());
}

EmbedderModel checkpoint_load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < kMagicLength ||
      std::memcmp(bytes.data(), kCheckpointMagic, kMagicLength) != 0) {
    throw CorruptCheckpoint(path.string() + " is not a checkpoint (bad magic)");
  }
  const std::vector<unsigned char> body(bytes.begin() + kMagicLength, bytes.end());
  Reader r(body);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CorruptCheckpoint("checkpoint format version " + std::to_string(version) +
                            " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
  }
  const auto arch_code = r.get<std::uint32_t>("architecture");
  if (arch_code > 1) throw CorruptCheckpoint("unknown architecture code");
  const Architecture arch = arch_code == 0 ? Architecture::Linear : Architecture::MLP;
  const auto ndims = r.get<std::uint32_t>("dimension count");
  if (ndims != (arch == Architecture::Linear ? 2u : 3u)) {
    throw CorruptCheckpoint("dimension count does not match architecture");
  }
  std::vector<std::size_t> dims;
  for (std::uint32_t k = 0; k < ndims; ++k) {
    const auto d = r.get<std::uint64_t>("dimension");
    if (d == 0 || d > kMaxDim) throw CorruptCheckpoint("implausible dimension");
    dims.push_back(static_cast<std::size_t>(d));
  }
  std::vector<Matrix> params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    for (auto [rows, cols] : {std::pair{dims[l + 1], dims[l]}, std::pair{std::size_t{1}, dims[l + 1]}}) {
      if (r.remaining() / 8 < rows * cols) throw CorruptCheckpoint("checkpoint truncated");
      Matrix m(rows, cols);
      for (double& v : m.data()) v = std::bit_cast<double>(r.get<std::uint64_t>("parameter"));
      params.push_back(std::move(m));
    }
  }
  if (!r.at_end()) throw CorruptCheckpoint("trailing bytes after parameters");
  try {
    return EmbedderModel::from_parameters(arch, std::move(dims), std::move(params));
  } catch (const Error& e) {
    throw CorruptCheckpoint(std::string("invalid parameters: ") + e.what());
  }
}

}  // namespace mlkit
