class Helper {
    static int scale(int n) {
        return n * UnknownType.FACTOR;
    }
}
