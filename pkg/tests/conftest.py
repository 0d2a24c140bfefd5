import pytest

from aesdfa.aes import hex_to_block

# FIPS-197 Appendix B inputs, reused by the worked fault example
KEY = hex_to_block("2B7E151628AED2A6ABF7158809CF4F3C")
PLAINTEXT = hex_to_block("3243F6A8885A308D313198A2E0370734")
CIPHERTEXT = hex_to_block("3925841D02DC09FBDC118597196A0B32")
K10 = hex_to_block("D014F9A8C9EE2589E13F0CC8B6630CA6")
K9 = hex_to_block("AC7766F319FADC2128D12941575C006E")


def rows_to_block(rows):
    """Printed 4x4 table (list of row strings) to a column-major block."""
    cells = [r.split() for r in rows]
    return bytes(int(cells[r][c], 16) for c in range(4) for r in range(4))


@pytest.fixture
def example_key():
    return KEY


@pytest.fixture
def example_plaintext():
    return PLAINTEXT


# criterion number -> (description, passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
