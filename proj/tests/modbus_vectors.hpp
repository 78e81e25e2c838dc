// Generated by gen_modbus_vectors.py from the Modbus TCP framing rules.
// Fixture: freshly booted device, all registers/coils zero. Do not edit.
#pragma once
#include <cstdint>
#include <string>
#include <vector>

struct ModbusVector {
    std::string name;
    std::vector<uint8_t> request;
    std::vector<uint8_t> response;
};

inline const std::vector<ModbusVector>& modbus_vectors() {
    static const std::vector<ModbusVector> v = {
        {"fc3_read_hr0", {0x00,0x01,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x00,0x00,0x01}, {0x00,0x01,0x00,0x00,0x00,0x05,0x01,0x03,0x02,0x00,0x00}},
        {"fc3_read_hr0_hr4", {0x00,0x02,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x00,0x00,0x05}, {0x00,0x02,0x00,0x00,0x00,0x0d,0x01,0x03,0x0a,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00}},
        {"fc3_read_full_map", {0x00,0x03,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x00,0x00,0x10}, {0x00,0x03,0x00,0x00,0x00,0x23,0x01,0x03,0x20,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00,0x00}},
        {"fc3_qty_zero", {0x00,0x04,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x00,0x00,0x00}, {0x00,0x04,0x00,0x00,0x00,0x03,0x01,0x83,0x03}},
        {"fc3_qty_126", {0x00,0x05,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x00,0x00,0x7e}, {0x00,0x05,0x00,0x00,0x00,0x03,0x01,0x83,0x03}},
        {"fc3_start_16", {0x00,0x06,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x10,0x00,0x01}, {0x00,0x06,0x00,0x00,0x00,0x03,0x01,0x83,0x02}},
        {"fc3_start_9999", {0x00,0x07,0x00,0x00,0x00,0x06,0x01,0x03,0x27,0x0f,0x00,0x02}, {0x00,0x07,0x00,0x00,0x00,0x03,0x01,0x83,0x02}},
        {"fc3_crosses_end", {0x00,0x08,0x00,0x00,0x00,0x06,0x01,0x03,0x00,0x0a,0x00,0x07}, {0x00,0x08,0x00,0x00,0x00,0x03,0x01,0x83,0x02}},
        {"fc1_read_coils", {0x00,0x09,0x00,0x00,0x00,0x06,0x01,0x01,0x00,0x00,0x00,0x10}, {0x00,0x09,0x00,0x00,0x00,0x05,0x01,0x01,0x02,0x00,0x00}},
        {"fc1_qty_zero", {0x00,0x0a,0x00,0x00,0x00,0x06,0x01,0x01,0x00,0x00,0x00,0x00}, {0x00,0x0a,0x00,0x00,0x00,0x03,0x01,0x81,0x03}},
        {"fc1_start_16", {0x00,0x0b,0x00,0x00,0x00,0x06,0x01,0x01,0x00,0x10,0x00,0x01}, {0x00,0x0b,0x00,0x00,0x00,0x03,0x01,0x81,0x02}},
        {"fc5_coil3_on", {0x00,0x0c,0x00,0x00,0x00,0x06,0x01,0x05,0x00,0x03,0xff,0x00}, {0x00,0x0c,0x00,0x00,0x00,0x06,0x01,0x05,0x00,0x03,0xff,0x00}},
        {"fc5_bad_value", {0x00,0x0d,0x00,0x00,0x00,0x06,0x01,0x05,0x00,0x03,0x12,0x34}, {0x00,0x0d,0x00,0x00,0x00,0x03,0x01,0x85,0x03}},
        {"fc5_coil_99", {0x00,0x0e,0x00,0x00,0x00,0x06,0x01,0x05,0x00,0x63,0xff,0x00}, {0x00,0x0e,0x00,0x00,0x00,0x03,0x01,0x85,0x02}},
        {"fc6_hr7", {0x00,0x0f,0x00,0x00,0x00,0x06,0x01,0x06,0x00,0x07,0x04,0xd2}, {0x00,0x0f,0x00,0x00,0x00,0x06,0x01,0x06,0x00,0x07,0x04,0xd2}},
        {"fc6_addr_500", {0x00,0x10,0x00,0x00,0x00,0x06,0x01,0x06,0x01,0xf4,0x00,0x01}, {0x00,0x10,0x00,0x00,0x00,0x03,0x01,0x86,0x02}},
        {"fc15_three_coils", {0x00,0x11,0x00,0x00,0x00,0x08,0x01,0x0f,0x00,0x00,0x00,0x03,0x01,0x07}, {0x00,0x11,0x00,0x00,0x00,0x06,0x01,0x0f,0x00,0x00,0x00,0x03}},
        {"fc15_start12_qty8", {0x00,0x12,0x00,0x00,0x00,0x08,0x01,0x0f,0x00,0x0c,0x00,0x08,0x01,0xff}, {0x00,0x12,0x00,0x00,0x00,0x03,0x01,0x8f,0x02}},
        {"fc15_bad_bytecount", {0x00,0x13,0x00,0x00,0x00,0x09,0x01,0x0f,0x00,0x00,0x00,0x03,0x02,0x07,0x00}, {0x00,0x13,0x00,0x00,0x00,0x03,0x01,0x8f,0x03}},
        {"fc15_qty_zero", {0x00,0x14,0x00,0x00,0x00,0x07,0x01,0x0f,0x00,0x00,0x00,0x00,0x00}, {0x00,0x14,0x00,0x00,0x00,0x03,0x01,0x8f,0x03}},
        {"fc16_two_regs", {0x00,0x15,0x00,0x00,0x00,0x0b,0x01,0x10,0x00,0x05,0x00,0x02,0x04,0x00,0x01,0x00,0x02}, {0x00,0x15,0x00,0x00,0x00,0x06,0x01,0x10,0x00,0x05,0x00,0x02}},
        {"fc16_bad_bytecount", {0x00,0x16,0x00,0x00,0x00,0x0a,0x01,0x10,0x00,0x05,0x00,0x02,0x03,0x00,0x01,0x00}, {0x00,0x16,0x00,0x00,0x00,0x03,0x01,0x90,0x03}},
        {"fc16_crosses_end", {0x00,0x17,0x00,0x00,0x00,0x0b,0x01,0x10,0x00,0x0f,0x00,0x02,0x04,0x00,0x01,0x00,0x02}, {0x00,0x17,0x00,0x00,0x00,0x03,0x01,0x90,0x02}},
        {"fc_0x2b_unsupported", {0x00,0x18,0x00,0x00,0x00,0x05,0x01,0x2b,0x0e,0x01,0x00}, {0x00,0x18,0x00,0x00,0x00,0x03,0x01,0xab,0x01}},
        {"fc_0x11_unsupported", {0x00,0x19,0x00,0x00,0x00,0x02,0x01,0x11}, {0x00,0x19,0x00,0x00,0x00,0x03,0x01,0x91,0x01}},
        {"fc_0x04_unsupported", {0x00,0x1a,0x00,0x00,0x00,0x06,0x01,0x04,0x00,0x00,0x00,0x01}, {0x00,0x1a,0x00,0x00,0x00,0x03,0x01,0x84,0x01}},
    };
    return v;
}
