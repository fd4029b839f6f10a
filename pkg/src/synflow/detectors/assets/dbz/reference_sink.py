def extract(root):
    found = []
    for n in root.walk():
        if n.type == "binary_expression":
            op, operand = n.child("operator"), n.child("right")
            ops = ("/", "%")
        elif n.type == "assignment_expression":
            op, operand = n.child("operator"), n.child("right")
            ops = ("/=", "%=")
        else:
            continue
        if op is None or op.type not in ops:
            continue
        operand = strip(operand)
        if operand is not None and operand.type == "identifier":
            found.append(operand)
    return found
