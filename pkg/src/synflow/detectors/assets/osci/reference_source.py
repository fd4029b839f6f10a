SOURCE_CALLS = {"getenv", "getProperty", "readLine", "nextLine"}


def extract(root):
    found = []
    for target, value in assignments(root):
        value = strip(value)
        if value.type == "method_invocation" and call_name(value) in SOURCE_CALLS:
            found.append(target)
    return found
