#ifndef QPKT_HUFFMAN_HPP
#define QPKT_HUFFMAN_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qpkt::detail {

// Canonical prefix-coded blob, fully deterministic for a given symbol
// sequence: [u64 n_symbols][u32 n_distinct][(u16 symbol, u8 length)...]
// [MSB-first packed codes].  Ties in the tree build break toward smaller
// symbols, and code words come from the (length, symbol) canonical order,
// so equal inputs always produce identical bytes.
std::vector<std::byte> huffman_pack(std::span<const uint16_t> symbols);
std::vector<uint16_t> huffman_unpack(std::span<const std::byte> blob);

}  // namespace qpkt::detail

#endif
