#include "mlao/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mlao {

namespace {

int read_header_int(std::istream& in)
{
    int c = in.peek();
    while (in && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            in.get();
        }
        c = in.peek();
    }
    int v = -1;
    in >> v;
    if (!in) throw FormatError("malformed PGM header");
    return v;
}

} // namespace

Frame read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    char magic[2] = {};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') throw FormatError(path.string() + ": not a binary PGM");
    const int w = read_header_int(in);
    const int h = read_header_int(in);
    const int maxval = read_header_int(in);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw FormatError(path.string() + ": unsupported PGM");
    in.get();
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw FormatError(path.string() + ": truncated PGM");
    Frame f(w, h);
    for (std::size_t i = 0; i < buf.size(); ++i) f.data()[i] = buf[i] / static_cast<double>(maxval);
    return f;
}

void write_pgm16(const std::filesystem::path& path, const Frame& f, double full_scale)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << f.width() << ' ' << f.height() << "\n65535\n";
    for (double v : f.pixels()) {
        const double s = full_scale > 0 ? v / full_scale : 0.0;
        const auto q = static_cast<unsigned>(std::lround(std::clamp(s, 0.0, 1.0) * 65535.0));
        const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8), static_cast<unsigned char>(q & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
}

} // namespace mlao
