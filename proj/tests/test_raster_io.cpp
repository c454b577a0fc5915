#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gapfill/io.hpp"
#include "gapfill/raster.hpp"
#include "gapfill/rng.hpp"

#include "test_util.hpp"

using namespace gapfill;
using testutil::random_raster;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("expand_lowres replicates constant tiles") {
    Raster z(1, 1, 1);
    z.at(0, 0, 0) = 7;
    const Raster e = expand_lowres(z, 2);
    CHECK(e.width == 2);
    CHECK(e.height == 2);
    for (std::uint8_t v : e.data) CHECK(v == 7);

    Raster col(1, 2, 1);
    col.at(0, 0, 0) = 1;
    col.at(0, 0, 1) = 9;
    const Raster e2 = expand_lowres(col, 3);
    CHECK(e2.width == 3);
    CHECK(e2.height == 6);
    for (int row = 0; row < 3; ++row)
        for (int c = 0; c < 3; ++c) CHECK(e2.at(0, c, row) == 1);
    for (int row = 3; row < 6; ++row)
        for (int c = 0; c < 3; ++c) CHECK(e2.at(0, c, row) == 9);
}

TEST_CASE("expand_lowres with n_z 1 is the identity") {
    PixelRng rng(11, 0);
    const Raster z = random_raster(rng, 6, 4, 2);
    CHECK(expand_lowres(z, 1) == z);
}

TEST_CASE("block average undoes expansion") {
    PixelRng rng(12, 0);
    for (int n_z : {2, 3, 5}) {
        const Raster z = random_raster(rng, 7, 5, 3);
        const Raster big = expand_lowres(z, n_z);
        const BlockGrid grid(big.width, big.height, n_z);
        for (int b = 0; b < z.bands; ++b)
            for (int br = 0; br < grid.blocks_high; ++br)
                for (int bc = 0; bc < grid.blocks_wide; ++bc) {
                    std::int64_t sum = 0;
                    for (int r = 0; r < n_z; ++r)
                        for (int c = 0; c < n_z; ++c)
                            sum += big.at(b, bc * n_z + c, br * n_z + r);
                    CHECK(sum == static_cast<std::int64_t>(z.at(b, bc, br)) * n_z * n_z);
                }
    }
}

TEST_CASE("pixel to block-offset mapping is a bijection") {
    const int n_z = 4;
    const BlockGrid grid(12, 8, n_z);
    std::vector<int> seen(12 * 8, 0);
    for (int row = 0; row < 8; ++row)
        for (int col = 0; col < 12; ++col) {
            const int bc = grid.block_col(col), br = grid.block_row(row);
            const int d = grid.offset_col(col), g = grid.offset_row(row);
            CHECK(bc * n_z + d == col);
            CHECK(br * n_z + g == row);
            ++seen[(grid.block_index(bc, br) * n_z + g) * n_z + d];
        }
    for (int count : seen) CHECK(count == 1);
}

TEST_CASE("crop windows") {
    PixelRng rng(13, 0);
    const Raster r = random_raster(rng, 4, 4, 2);
    CHECK(crop(r, 0, 0, 4, 4) == r);

    const Raster q = crop(r, 2, 2, 2, 2);
    for (int b = 0; b < 2; ++b)
        for (int row = 0; row < 2; ++row)
            for (int col = 0; col < 2; ++col)
                CHECK(q.at(b, col, row) == r.at(b, col + 2, row + 2));

    CHECK_THROWS_AS(crop(r, 3, 3, 2, 2), std::invalid_argument);
}

TEST_CASE("quantize rounds half up and clamps") {
    CHECK(quantize_value(-3.2) == 0);
    CHECK(quantize_value(0.49) == 0);
    CHECK(quantize_value(0.5) == 1);
    CHECK(quantize_value(12.5) == 13);
    CHECK(quantize_value(254.5) == 255);
    CHECK(quantize_value(300.0) == 255);
}

TEST_CASE("BRAW round trip is bit exact") {
    PixelRng rng(14, 0);
    const std::string path = temp_path("gapfill_braw_roundtrip.braw");
    for (int i = 0; i < 25; ++i) {
        const int w = 1 + static_cast<int>(rng.next_below(17));
        const int h = 1 + static_cast<int>(rng.next_below(13));
        const int b = 1 + static_cast<int>(rng.next_below(4));
        const Raster r = random_raster(rng, w, h, b);
        write_raster(r, path);
        CHECK(read_raster(path) == r);
    }
    std::remove(path.c_str());
}

TEST_CASE("BRAW parse failures are distinct") {
    const std::string path = temp_path("gapfill_braw_bad.braw");
    auto write_file = [&](const std::string& bytes) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
    };

    write_file("BRAW 2 2 0\nxxxx"); // zero bands
    try {
        read_raster(path);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::BadDimensions);
    }

    write_file("BRAW 2 2 1\nxxx"); // one byte short
    try {
        read_raster(path);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::Truncated);
    }

    write_file("NOTBRAW 2 2 1\nxxxx");
    try {
        read_raster(path);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::BadHeader);
    }

    write_file("BRAW 9999999 9999999 64\n"); // payload size overflows the cap
    try {
        read_raster(path);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.kind() == ParseError::Kind::BadDimensions);
    }
    std::remove(path.c_str());
}

TEST_CASE("PGM export and import round trip per band") {
    PixelRng rng(15, 0);
    const Raster r = random_raster(rng, 9, 6, 2);
    const std::string path = temp_path("gapfill_band.pgm");
    for (int b = 0; b < r.bands; ++b) {
        write_pgm(r, b, path);
        const Raster back = read_pgm(path);
        CHECK(back.width == r.width);
        CHECK(back.height == r.height);
        for (int row = 0; row < r.height; ++row)
            for (int col = 0; col < r.width; ++col)
                CHECK(back.at(0, col, row) == r.at(b, col, row));
    }
    std::remove(path.c_str());
}

TEST_CASE("mask and class map raster conversion") {
    GapMask m(3, 2);
    m.set(1, 0, true);
    m.set(2, 1, true);
    CHECK(mask_from_raster(mask_to_raster(m)) == m);

    ClassMap c(3, 2, 4);
    c.at(0, 0) = 4;
    c.at(2, 1) = 1;
    const ClassMap back = classmap_from_raster(classmap_to_raster(c), 4);
    CHECK(back.labels == c.labels);
}
