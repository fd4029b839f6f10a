COMMAND_CALLS = {"exec", "ProcessBuilder", "command"}


def extract(root):
    found = []
    for n in root.walk():
        if n.type in CALLS and call_name(n) in COMMAND_CALLS:
            for arg in call_arguments(n):
                found.extend(direct_identifiers(arg))
    return found
