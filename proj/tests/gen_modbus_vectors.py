#!/usr/bin/env python3
"""Generates modbus_vectors.hpp: request/response byte vectors built directly
from the Modbus TCP framing rules (MBAP header + PDU), independent of the C++
implementation under test.

The fixture state is a freshly booted device: HR0..HR15 = 0, coils all off.
"""

import struct

CASES = []


def mbap(tid, pdu, uid=1):
    return struct.pack(">HHHB", tid, 0, len(pdu) + 1, uid) + pdu


def case(name, tid, req_pdu, resp_pdu):
    CASES.append((name, mbap(tid, req_pdu), mbap(tid, resp_pdu)))


def exc(fc, code):
    return struct.pack(">BB", fc | 0x80, code)


# --- reads against the all-zero boot image ---
case("fc3_read_hr0", 1, struct.pack(">BHH", 3, 0, 1), struct.pack(">BB", 3, 2) + b"\x00\x00")
case("fc3_read_hr0_hr4", 2, struct.pack(">BHH", 3, 0, 5), struct.pack(">BB", 3, 10) + b"\x00" * 10)
case("fc3_read_full_map", 3, struct.pack(">BHH", 3, 0, 16), struct.pack(">BB", 3, 32) + b"\x00" * 32)
case("fc3_qty_zero", 4, struct.pack(">BHH", 3, 0, 0), exc(3, 3))
case("fc3_qty_126", 5, struct.pack(">BHH", 3, 0, 126), exc(3, 3))
case("fc3_start_16", 6, struct.pack(">BHH", 3, 16, 1), exc(3, 2))
case("fc3_start_9999", 7, struct.pack(">BHH", 3, 9999, 2), exc(3, 2))
case("fc3_crosses_end", 8, struct.pack(">BHH", 3, 10, 7), exc(3, 2))

case("fc1_read_coils", 9, struct.pack(">BHH", 1, 0, 16), struct.pack(">BB", 1, 2) + b"\x00\x00")
case("fc1_qty_zero", 10, struct.pack(">BHH", 1, 0, 0), exc(1, 3))
case("fc1_start_16", 11, struct.pack(">BHH", 1, 16, 1), exc(1, 2))

# --- writes: responses echo / report range errors ---
case("fc5_coil3_on", 12, struct.pack(">BHH", 5, 3, 0xFF00), struct.pack(">BHH", 5, 3, 0xFF00))
case("fc5_bad_value", 13, struct.pack(">BHH", 5, 3, 0x1234), exc(5, 3))
case("fc5_coil_99", 14, struct.pack(">BHH", 5, 99, 0xFF00), exc(5, 2))

case("fc6_hr7", 15, struct.pack(">BHH", 6, 7, 1234), struct.pack(">BHH", 6, 7, 1234))
case("fc6_addr_500", 16, struct.pack(">BHH", 6, 500, 1), exc(6, 2))

case("fc15_three_coils", 17, struct.pack(">BHHB", 15, 0, 3, 1) + b"\x07",
     struct.pack(">BHH", 15, 0, 3))
case("fc15_start12_qty8", 18, struct.pack(">BHHB", 15, 12, 8, 1) + b"\xff", exc(15, 2))
case("fc15_bad_bytecount", 19, struct.pack(">BHHB", 15, 0, 3, 2) + b"\x07\x00", exc(15, 3))
case("fc15_qty_zero", 20, struct.pack(">BHHB", 15, 0, 0, 0), exc(15, 3))

case("fc16_two_regs", 21, struct.pack(">BHHB", 16, 5, 2, 4) + struct.pack(">HH", 1, 2),
     struct.pack(">BHH", 16, 5, 2))
case("fc16_bad_bytecount", 22, struct.pack(">BHHB", 16, 5, 2, 3) + b"\x00\x01\x00",
     exc(16, 3))
case("fc16_crosses_end", 23, struct.pack(">BHHB", 16, 15, 2, 4) + struct.pack(">HH", 1, 2),
     exc(16, 2))

# --- unsupported functions ---
case("fc_0x2b_unsupported", 24, b"\x2b\x0e\x01\x00", exc(0x2B, 1))
case("fc_0x11_unsupported", 25, b"\x11", exc(0x11, 1))
case("fc_0x04_unsupported", 26, struct.pack(">BHH", 4, 0, 1), exc(4, 1))


def cpp_bytes(b):
    return "{" + ",".join(f"0x{x:02x}" for x in b) + "}"


print("// Generated by gen_modbus_vectors.py from the Modbus TCP framing rules.")
print("// Fixture: freshly booted device, all registers/coils zero. Do not edit.")
print("#pragma once")
print("#include <cstdint>")
print("#include <string>")
print("#include <vector>")
print()
print("struct ModbusVector {")
print("    std::string name;")
print("    std::vector<uint8_t> request;")
print("    std::vector<uint8_t> response;")
print("};")
print()
print("inline const std::vector<ModbusVector>& modbus_vectors() {")
print("    static const std::vector<ModbusVector> v = {")
for name, req, resp in CASES:
    print(f'        {{"{name}", {cpp_bytes(req)}, {cpp_bytes(resp)}}},')
print("    };")
print("    return v;")
print("}")
