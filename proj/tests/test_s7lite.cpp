#include <doctest.h>

#include <random>

#include "windtrap/redteam.hpp"
#include "windtrap/s7lite.hpp"

using namespace windtrap;

namespace {

s7::DeviceIdentity test_identity() {
    s7::DeviceIdentity id;
    id.module_type = "CPU 1211C AC/DC/Rly";
    id.order_number = "6ES7 211-1BE40-0XB0";
    id.serial = "S C-TEST0001";
    id.firmware = "V 4.2.1";
    id.plant_id = "WINDFARM-A/WT-07";
    return id;
}

std::vector<uint8_t> cr_payload(uint8_t tpdu_code) {
    return {0x11, 0xE0, 0x00, 0x00, 0x12, 0x34, 0x00, 0xC0, 0x01, tpdu_code,
            0xC1, 0x02, 0x01, 0x00, 0xC2, 0x02, 0x01, 0x02};
}

std::vector<uint8_t> dt_wrap(const std::vector<uint8_t>& s7_pdu) {
    std::vector<uint8_t> out{0x02, 0xF0, 0x80};
    out.insert(out.end(), s7_pdu.begin(), s7_pdu.end());
    return out;
}

}  // namespace

TEST_CASE("tpkt: splits on headers, length includes the 4-byte header") {
    s7::TpktAssembler a;
    const uint8_t one[] = {0x03, 0x00, 0x00, 0x0B, 1, 2, 3, 4, 5, 6, 7};
    auto payloads = a.feed(one, sizeof(one));
    REQUIRE(payloads.size() == 1);
    CHECK(payloads[0] == std::vector<uint8_t>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("tpkt: wrong version poisons the stream") {
    s7::TpktAssembler a;
    const uint8_t bad[] = {0x02, 0x00, 0x00, 0x05, 0xAA};
    CHECK(a.feed(bad, sizeof(bad)).empty());
    CHECK(a.poisoned());
}

TEST_CASE("tpkt: two concatenated frames come out in order") {
    s7::TpktAssembler a;
    const uint8_t two[] = {0x03, 0x00, 0x00, 0x05, 0xAA, 0x03, 0x00, 0x00, 0x06, 0xBB, 0xCC};
    auto payloads = a.feed(two, sizeof(two));
    REQUIRE(payloads.size() == 2);
    CHECK(payloads[0] == std::vector<uint8_t>{0xAA});
    CHECK(payloads[1] == std::vector<uint8_t>{0xBB, 0xCC});
}

TEST_CASE("tpkt: partial frames buffer across feeds") {
    s7::TpktAssembler a;
    const uint8_t frame[] = {0x03, 0x00, 0x00, 0x06, 0xAA, 0xBB};
    CHECK(a.feed(frame, 3).empty());
    auto payloads = a.feed(frame + 3, 3);
    REQUIRE(payloads.size() == 1);
    CHECK(payloads[0].size() == 2);
}

TEST_CASE("cotp connect: confirm echoes the caller and caps the TPDU size") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    s7::Engine engine(test_identity(), plc, nullptr);

    bool close = false;
    auto cc = engine.handle_payload(cr_payload(0x0B /*2048*/), "t", close);
    CHECK_FALSE(close);
    REQUIRE(cc.size() >= 9);
    CHECK((cc[1] & 0xF0) == 0xD0);              // connection confirm
    CHECK(cc[2] == 0x12);                        // dst ref = caller's src ref
    CHECK(cc[3] == 0x34);
    CHECK(cc[6] == 0x00);                        // class 0
    CHECK(engine.negotiated_tpdu_size() == 1024);  // min(2048, 1024)
    CHECK(engine.state() == s7::CotpState::Connected);
}

TEST_CASE("cotp: data before connect closes the connection") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    s7::Engine engine(test_identity(), plc, nullptr);
    bool close = false;
    auto resp = engine.handle_payload(dt_wrap({0x32, 0x01}), "t", close);
    CHECK(close);
    CHECK(resp.empty());
    CHECK(engine.state() == s7::CotpState::AwaitCR);
}

TEST_CASE("setup communication acknowledges with the 240-byte PDU length") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    s7::Engine engine(test_identity(), plc, nullptr);
    bool close = false;
    engine.handle_payload(cr_payload(0x0A), "t", close);

    std::vector<uint8_t> setup{0x32, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x08, 0x00, 0x00,
                               0xF0, 0x00, 0x00, 0x01, 0x00, 0x01, 0x01, 0xE0};  // asks 480
    auto resp = engine.handle_payload(dt_wrap(setup), "t", close);
    CHECK_FALSE(close);
    REQUIRE(resp.size() >= 3 + 12 + 8);
    // skip COTP DT (3): S7 ack-data, error 0/0, granted length at the end
    CHECK(resp[3] == 0x32);
    CHECK(resp[4] == 0x03);
    CHECK(resp[13] == 0x00);  // error class
    CHECK(resp[14] == 0x00);
    uint16_t granted = static_cast<uint16_t>(resp[resp.size() - 2] << 8 | resp.back());
    CHECK(granted == 240);
}

TEST_CASE("data-block read returns the register block") {
    ControllerConfig cfg;
    cfg.full_scale_rotor = 4.0;
    PlcController plc(cfg);
    plc.submit(AnalogWriteCmd{0, 409});
    plc.submit(AnalogWriteCmd{1, 307});
    plc.scan(0.1);
    plc.scan(0.2);
    REQUIRE(plc.snapshot().state == FsmState::Generating);

    s7::Engine engine(test_identity(), plc, nullptr);
    bool close = false;
    engine.handle_payload(cr_payload(0x0A), "t", close);

    // read var: one S7ANY item, DB1, word 0
    std::vector<uint8_t> read{0x32, 0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 0x0E, 0x00, 0x00,
                              0x04, 0x01,
                              0x12, 0x0A, 0x10, 0x04, 0x00, 0x01, 0x00, 0x01, 0x84,
                              0x00, 0x00, 0x00};
    auto resp = engine.handle_payload(dt_wrap(read), "t", close);
    REQUIRE(resp.size() >= 3 + 12 + 2 + 4 + 2);
    size_t s7 = 3;
    CHECK(resp[s7] == 0x32);
    CHECK(resp[s7 + 1] == 0x03);
    // data section: item return code FF, transport 04, length in bits, then the word
    size_t data = s7 + 12 + 2;
    REQUIRE(resp.size() >= data + 6);
    CHECK(resp[data] == 0xFF);
    uint16_t word = static_cast<uint16_t>(resp[data + 4] << 8 | resp[data + 5]);
    CHECK(word == 2);  // HR0 == Generating, same oracle as the Modbus read
}

TEST_CASE("write attempts are denied with an S7 error and never mutate memory") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    plc.scan(0.1);
    auto before = plc.snapshot().image.holding_registers;

    s7::Engine engine(test_identity(), plc, nullptr);
    bool close = false;
    engine.handle_payload(cr_payload(0x0A), "t", close);
    // write var (function 0x05)
    std::vector<uint8_t> write{0x32, 0x01, 0x00, 0x00, 0x00, 0x03, 0x00, 0x0E, 0x00, 0x05,
                               0x05, 0x01,
                               0x12, 0x0A, 0x10, 0x04, 0x00, 0x01, 0x00, 0x01, 0x84,
                               0x00, 0x00, 0x00,
                               0x00, 0x04, 0x00, 0x10, 0xBE, 0xEF};
    auto resp = engine.handle_payload(dt_wrap(write), "t", close);
    REQUIRE(resp.size() >= 3 + 12);
    CHECK(resp[3 + 10] == 0x81);  // error class: function not available
    CHECK(resp[3 + 11] == 0x04);

    plc.scan(0.2);
    CHECK(plc.snapshot().image.holding_registers == before);
}

TEST_CASE("szl identity read carries the configured module type") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    s7::Engine engine(test_identity(), plc, nullptr);
    bool close = false;
    engine.handle_payload(cr_payload(0x0A), "t", close);

    std::vector<uint8_t> szl{0x32, 0x07, 0x00, 0x00, 0x00, 0x02, 0x00, 0x08, 0x00, 0x08,
                             0x00, 0x01, 0x12, 0x04, 0x11, 0x44, 0x01, 0x00,
                             0xFF, 0x09, 0x00, 0x04, 0x00, 0x1C, 0x00, 0x00};
    auto resp = engine.handle_payload(dt_wrap(szl), "t", close);
    std::string text(resp.begin(), resp.end());
    CHECK(text.find("CPU 1211C AC/DC/Rly") != std::string::npos);
    CHECK(text.find("S C-TEST0001") != std::string::npos);
    CHECK(text.find("WINDFARM-A/WT-07") != std::string::npos);
}

TEST_CASE("fingerprint probe over a real socket extracts the identity") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    auto id = test_identity();
    s7::Server server(id, plc, nullptr);
    REQUIRE(server.start("127.0.0.1", 0));

    auto result = red::fingerprint_s7("127.0.0.1", server.port());
    REQUIRE(result.success);
    CHECK(result.identity.module_type == id.module_type);
    CHECK(result.identity.serial == id.serial);
    CHECK(result.identity.plant_id == id.plant_id);
    CHECK(result.identity.order_number == id.order_number);
    CHECK(result.identity.firmware == id.firmware);

    SUBCASE("altered identity is reflected") {
        s7::DeviceIdentity other = id;
        other.module_type = "CPU 1515-2 PN";
        other.serial = "S C-OTHER999";
        s7::Server server2(other, plc, nullptr);
        REQUIRE(server2.start("127.0.0.1", 0));
        auto r2 = red::fingerprint_s7("127.0.0.1", server2.port());
        REQUIRE(r2.success);
        CHECK(r2.identity.module_type == "CPU 1515-2 PN");
        CHECK(r2.identity.serial == "S C-OTHER999");
        server2.stop();
    }

    SUBCASE("probe against a closed port fails cleanly") {
        uint16_t dead_port = server.port();
        server.stop();
        auto r3 = red::fingerprint_s7("127.0.0.1", dead_port);
        CHECK_FALSE(r3.success);
        CHECK_FALSE(r3.error.empty());
    }
    server.stop();
}

TEST_CASE("no S7 response is emitted before the COTP confirm") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    s7::Engine engine(test_identity(), plc, nullptr);
    bool close = false;
    std::vector<uint8_t> setup{0x32, 0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x08, 0x00, 0x00,
                               0xF0, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0xF0};
    auto resp = engine.handle_payload(dt_wrap(setup), "t", close);
    CHECK(resp.empty());
    CHECK(close);
}

TEST_CASE("fuzz smoke: arbitrary payloads never crash and never write memory") {
    ControllerConfig cfg;
    PlcController plc(cfg);
    plc.scan(0.1);
    auto before = plc.snapshot().image;

    std::mt19937 rng(77);
    std::uniform_int_distribution<int> len(0, 80);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 5000; ++i) {
        s7::Engine engine(test_identity(), plc, nullptr);
        bool close = false;
        if (i % 2) engine.handle_payload(cr_payload(0x0A), "t", close);
        std::vector<uint8_t> payload(len(rng));
        for (auto& b : payload) b = static_cast<uint8_t>(byte(rng));
        engine.handle_payload(payload, "t", close);
    }
    plc.scan(0.2);
    CHECK(plc.snapshot().image.holding_registers == before.holding_registers);
    CHECK(plc.snapshot().image.coils == before.coils);
}
