import java.util.Scanner;

class Dbz01 {
    static int bad(Scanner in) {
        int data = in.nextInt();
        int result = 100 / data;
        return result;
    }

    static int good(Scanner in) {
        int data = in.nextInt();
        int result = 0;
        if (data != 0) {
            result = 100 / data;
        }
        return result;
    }
}
