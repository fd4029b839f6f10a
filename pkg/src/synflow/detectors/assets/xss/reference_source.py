SOURCE_CALLS = {"getParameter", "getQueryString", "getHeader", "getValue", "readLine"}


def extract(root):
    found = []
    for target, value in assignments(root):
        value = strip(value)
        if value.type == "method_invocation" and call_name(value) in SOURCE_CALLS:
            found.append(target)
    return found
