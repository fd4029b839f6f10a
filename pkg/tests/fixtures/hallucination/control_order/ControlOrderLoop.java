class ControlOrderLoop {
    static int bad(int seed) {
        int first = seed;
        int early = 0;
        for (int i = 0; i < 2; i++) {
            early = 100 / first;
            int data = 0;
            first = data;
        }
        return early;
    }
}
