class Dbz03 {
    static int div(int a, int b) {
        if (Math.abs(b) > 1)
            return a / b;
        return b;
    }

    static void run(java.util.Scanner in) {
        int x = in.nextInt();
        int y = 10;
        int r = 100 / y;
        int z = x;
        y = div(0, z);
        r = 100 / y;
    }
}
