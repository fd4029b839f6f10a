INPUT_CALLS = {
    "nextInt", "nextFloat", "nextDouble", "nextLong",
    "parseInt", "parseFloat", "parseDouble", "parseLong", "read",
}
ZERO_LITERALS = ("decimal_integer_literal", "decimal_floating_point_literal",
                 "hex_integer_literal", "octal_integer_literal", "binary_integer_literal")


def is_zero(node):
    if node.type not in ZERO_LITERALS:
        return False
    digits = node.text.lower().rstrip("lfd").replace("_", "")
    try:
        return float(int(digits, 0) if node.type != "decimal_floating_point_literal" else digits) == 0.0
    except ValueError:
        return False


def extract(root):
    found = []
    for target, value in assignments(root):
        value = strip(value)
        if value.type == "method_invocation" and call_name(value) in INPUT_CALLS:
            found.append(target)
        elif is_zero(value):
            found.append(target)
    return found
