EXIT_CODES = {
    0: "OK",
    1: "Tolerance Exceeded",
    2: "Configuration Or Model Error",
}

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INVALID = 2
