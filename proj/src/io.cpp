#include "graphtt/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace graphtt {

namespace {

// Both containers are little-endian; this implementation assumes a
// little-endian host (checked once at load/save time).
bool host_is_little_endian() {
  const std::uint32_t probe = 1;
  std::uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

void require_le() {
  if (!host_is_little_endian())
    throw std::runtime_error("tensor i/o requires a little-endian host");
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error(std::string("truncated file while reading ") + what);
  return v;
}

void write_f64s(std::ostream& os, const Eigen::VectorXd& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_f64s(std::istream& is, Eigen::VectorXd& v, const char* what) {
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw std::runtime_error(std::string("truncated file while reading ") + what);
}

void check_magic(std::istream& is, const char* magic) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw std::runtime_error(std::string("bad magic, expected ") + magic);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

}  // namespace

void save_tensor(const std::string& path, const DenseTensor& t) {
  require_le();
  std::ofstream os = open_out(path);
  os.write("GTT1", 4);
  write_u32(os, static_cast<std::uint32_t>(t.order()));
  for (Index d : t.shape()) write_u32(os, static_cast<std::uint32_t>(d));
  write_f64s(os, t.values());
  if (!os) throw std::runtime_error("write failed: " + path);
}

DenseTensor load_tensor(const std::string& path) {
  require_le();
  std::ifstream is = open_in(path);
  check_magic(is, "GTT1");
  const std::uint32_t order = read_u32(is, "order");
  if (order == 0 || order > 64) throw std::runtime_error("GTT1: implausible order");
  Shape shape(order);
  for (std::uint32_t d = 0; d < order; ++d) {
    shape[d] = static_cast<Index>(read_u32(is, "dims"));
    if (shape[d] < 1) throw std::runtime_error("GTT1: invalid dimension");
  }
  Eigen::VectorXd values(shape_size(shape));
  read_f64s(is, values, "values");
  return DenseTensor(std::move(shape), std::move(values));
}

void save_tt(const std::string& path, const TTFormat& tt) {
  require_le();
  tt.validate();
  std::ofstream os = open_out(path);
  os.write("GTTC", 4);
  write_u32(os, static_cast<std::uint32_t>(tt.order()));
  for (Index r : tt.ranks()) write_u32(os, static_cast<std::uint32_t>(r));
  for (Index d : tt.shape()) write_u32(os, static_cast<std::uint32_t>(d));
  for (const TTCore& c : tt.cores) write_f64s(os, c.data);
  if (!os) throw std::runtime_error("write failed: " + path);
}

TTFormat load_tt(const std::string& path) {
  require_le();
  std::ifstream is = open_in(path);
  check_magic(is, "GTTC");
  const std::uint32_t order = read_u32(is, "order");
  if (order == 0 || order > 64) throw std::runtime_error("GTTC: implausible order");
  std::vector<Index> ranks(order + 1);
  for (std::uint32_t d = 0; d <= order; ++d)
    ranks[d] = static_cast<Index>(read_u32(is, "ranks"));
  Shape shape(order);
  for (std::uint32_t d = 0; d < order; ++d)
    shape[d] = static_cast<Index>(read_u32(is, "dims"));
  TTFormat tt(shape, ranks);
  for (TTCore& c : tt.cores) read_f64s(is, c.data, "core");
  tt.validate();
  return tt;
}

}  // namespace graphtt
